"""Small dense complex linear algebra.

Matrices are plain ``numpy`` complex arrays. Every physical operator in the
package has entries of order one and dimension at most 16, so all checks use
a single absolute tolerance.
"""

from __future__ import annotations

import numpy as np

from edrlab.errors import DimensionError, PreconditionError

ATOL = 1e-10
D_MAX = 64
DEGENERACY_GAP = 1e-8


def as_matrix(x) -> np.ndarray:
    """Coerce ``x`` to a 2-D complex128 array (a copy is not guaranteed)."""
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def dagger(x) -> np.ndarray:
    return as_matrix(x).conj().T


def _require_square(x: np.ndarray) -> None:
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {x.shape}")


def hermitian_residual(x) -> float:
    x = as_matrix(x)
    _require_square(x)
    return float(np.max(np.abs(x - x.conj().T))) if x.size else 0.0


def is_hermitian(x, atol: float = ATOL) -> bool:
    return hermitian_residual(x) <= atol


def is_unitary(u, atol: float = ATOL) -> bool:
    u = as_matrix(u)
    _require_square(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol)


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b - b @ a


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with row index ``i_a * rows_b + i_b``."""
    a, b = as_matrix(a), as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > D_MAX or cols > D_MAX:
        raise DimensionError(
            f"tensor product shape {rows}x{cols} exceeds d_max={D_MAX}"
        )
    return np.kron(a, b)


def partial_trace(x, subsystem_dims: tuple[int, int], keep: str = "first") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``keep`` is ``"first"`` or ``"second"``; the discarded factor is traced.
    """
    x = as_matrix(x)
    _require_square(x)
    d1, d2 = (int(d) for d in subsystem_dims)
    if d1 < 1 or d2 < 1 or x.shape[0] != d1 * d2:
        raise DimensionError(
            f"matrix of size {x.shape[0]} is not a {d1}x{d2} bipartite operator"
        )
    t = x.reshape(d1, d2, d1, d2)
    if keep == "first":
        return np.einsum("ijkj->ik", t)
    if keep == "second":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'first' or 'second', not {keep!r}")


def hermitian_eig(x, atol: float = ATOL) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of a Hermitian matrix, eigenvalues in descending order.

    Within a degenerate cluster the returned vectors are orthonormal but their
    individual directions carry no meaning; use :func:`spectral_projectors`
    when degeneracy is possible.
    """
    x = as_matrix(x)
    _require_square(x)
    res = hermitian_residual(x)
    if res > atol:
        raise PreconditionError(
            f"matrix is not Hermitian (max |X - X^dagger| = {res:.3e})", residual=res
        )
    h = 0.5 * (x + x.conj().T)
    w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    return [(float(w[k]), v[:, k].copy()) for k in order]


def spectral_projectors(x, gap: float = DEGENERACY_GAP) -> list[tuple[float, np.ndarray]]:
    """Group eigenpairs into (eigenvalue, projector) clusters, descending.

    Eigenvalues closer than ``gap`` share a projector; the reported value is
    the cluster mean.
    """
    pairs = hermitian_eig(x)
    clusters: list[list[tuple[float, np.ndarray]]] = []
    for lam, vec in pairs:
        if clusters and abs(clusters[-1][-1][0] - lam) < gap:
            clusters[-1].append((lam, vec))
        else:
            clusters.append([(lam, vec)])
    out = []
    for cl in clusters:
        vecs = np.column_stack([v for _, v in cl])
        out.append((float(np.mean([lam for lam, _ in cl])), vecs @ vecs.conj().T))
    return out


def psd_sqrt(x, atol: float = ATOL) -> np.ndarray:
    """Square root of a positive semidefinite Hermitian matrix."""
    pairs = hermitian_eig(x, atol=atol)
    if pairs and pairs[-1][0] < -atol:
        raise PreconditionError(
            f"matrix is not positive semidefinite (min eigenvalue {pairs[-1][0]:.3e})",
            residual=-pairs[-1][0],
        )
    n = as_matrix(x).shape[0]
    # eigenvalues at round-off level are zero; sqrt would inflate 1e-17 to 3e-9
    floor = n * np.finfo(float).eps * max((abs(lam) for lam, _ in pairs), default=0.0)
    out = np.zeros((n, n), dtype=complex)
    for lam, v in pairs:
        if lam > floor:
            out += np.sqrt(lam) * np.outer(v, v.conj())
    return out


def operator_abs(x) -> np.ndarray:
    """``|X| = (X^dagger X)^{1/2}``, Hermitian and positive semidefinite."""
    x = as_matrix(x)
    _require_square(x)
    # from the SVD X = U S V^dagger, |X| = V S V^dagger; avoids square-rooting X^dagger X
    _, sv, vh = np.linalg.svd(x)
    out = (vh.conj().T * sv) @ vh
    return 0.5 * (out + out.conj().T)


def trace_norm(x) -> float:
    """Sum of singular values."""
    x = as_matrix(x)
    _require_square(x)
    return float(np.linalg.svd(x, compute_uv=False).sum())


def expectation(op, rho) -> complex:
    """``Tr(rho op)`` for a density matrix ``rho``."""
    op, rho = as_matrix(op), as_matrix(rho)
    if op.shape != rho.shape:
        raise DimensionError(f"operator {op.shape} and state {rho.shape} differ in shape")
    return complex(np.trace(rho @ op))
