"""Polarization-qubit states, density matrices and observables."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from edrlab.errors import DimensionError, InputError, NumericalInvariantError, PreconditionError
from edrlab.linalg import ATOL, as_matrix, hermitian_eig, hermitian_residual, spectral_projectors

SQRT1_2 = 1.0 / np.sqrt(2.0)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_STANDARD = {
    "H": (1.0, 0.0),
    "V": (0.0, 1.0),
    "D": (SQRT1_2, SQRT1_2),
    "A": (SQRT1_2, -SQRT1_2),
    "L": (SQRT1_2, 1j * SQRT1_2),
    "R": (SQRT1_2, -1j * SQRT1_2),
}


@dataclass(frozen=True)
class QubitPure:
    """``alpha |H> + beta |V>``."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise InputError(f"qubit amplitudes are not normalized (|a|^2+|b|^2 = {norm!r})")

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def density(self) -> "DensityState":
        return DensityState.from_ket(self.ket)


@dataclass(frozen=True, eq=False)
class DensityState:
    rho: np.ndarray

    def __post_init__(self):
        rho = as_matrix(self.rho)
        if rho.shape[0] != rho.shape[1]:
            raise DimensionError(f"density matrix must be square, got {rho.shape}")
        res = hermitian_residual(rho)
        if res > ATOL:
            raise PreconditionError(f"density matrix is not Hermitian ({res:.3e})", res)
        tr = np.trace(rho)
        if abs(tr - 1.0) > ATOL:
            raise PreconditionError(f"density matrix trace is {tr.real:.12g}, not 1")
        lam_min = hermitian_eig(rho)[-1][0]
        if lam_min < -ATOL:
            raise PreconditionError(f"density matrix has eigenvalue {lam_min:.3e} < 0", -lam_min)
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_ket(cls, ket) -> "DensityState":
        ket = np.asarray(ket, dtype=complex).ravel()
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def maximally_mixed(cls, d: int = 2) -> "DensityState":
        return cls(np.eye(d, dtype=complex) / d)

    @property
    def d(self) -> int:
        return self.rho.shape[0]

    def expect(self, op) -> complex:
        op = as_matrix(op)
        if op.shape != self.rho.shape:
            raise DimensionError(f"operator {op.shape} incompatible with state of dim {self.d}")
        return complex(np.trace(self.rho @ op))

    def is_pure(self, atol: float = ATOL) -> bool:
        return abs(np.real(np.trace(self.rho @ self.rho)) - 1.0) <= atol


class Observable:
    """Hermitian observable with its spectral decomposition precomputed.

    ``spectrum`` is descending and ``projectors[k]`` is the spectral projector
    of ``spectrum[k]``.
    """

    def __init__(self, matrix, name: str | None = None):
        m = as_matrix(matrix).copy()
        res = hermitian_residual(m)
        if res > ATOL:
            raise PreconditionError(f"observable is not Hermitian ({res:.3e})", res)
        m.setflags(write=False)
        self.matrix = m
        self.name = name
        pairs = spectral_projectors(m)
        self.spectrum = tuple(lam for lam, _ in pairs)
        self.projectors = tuple(p for _, p in pairs)
        for p in self.projectors:
            p.setflags(write=False)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def squares_to_identity(self, atol: float = ATOL) -> bool:
        return bool(np.max(np.abs(self.matrix @ self.matrix - np.eye(self.d))) <= atol)

    def __repr__(self):
        label = self.name or "matrix"
        return f"Observable({label}, spectrum={self.spectrum})"


OBSERVABLE_NAMES = ("sigma_x", "sigma_y", "sigma_z")


def pauli_observable(name: str) -> Observable:
    key = name.removeprefix("sigma_") if name.startswith("sigma_") else None
    if key not in ("x", "y", "z"):
        raise InputError(f"unknown observable {name!r}; expected one of {OBSERVABLE_NAMES}")
    return Observable(PAULI[key], name=name)


def bloch_axis(obs: Observable) -> np.ndarray:
    """Unit vector ``a`` with ``obs = a . sigma`` for a traceless +-1 qubit observable."""
    if obs.d != 2:
        raise DimensionError("Bloch axis is defined for qubit observables only")
    return np.array([np.real(np.trace(obs.matrix @ PAULI[k])) / 2 for k in "xyz"])


def standard_state(name: str) -> QubitPure:
    try:
        alpha, beta = _STANDARD[name]
    except KeyError:
        raise InputError(
            f"unknown polarization state {name!r}; expected one of {sorted(_STANDARD)}"
        ) from None
    return QubitPure(complex(alpha), complex(beta))


_NUM = r"\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*"
_PAIR_RE = re.compile(rf"^\s*\[{_NUM},{_NUM}\]\s*,\s*\[{_NUM},{_NUM}\]\s*$")


def parse_state(literal) -> QubitPure:
    """Parse a state literal: a name (``"L"``), a string ``"[re,im],[re,im]"``
    or a nested sequence ``[[re, im], [re, im]]``.

    Explicit amplitudes are normalized, since config files carry rounded values.
    """
    if isinstance(literal, QubitPure):
        return literal
    if isinstance(literal, str):
        s = literal.strip()
        if s in _STANDARD:
            return standard_state(s)
        if s.startswith("[[") and s.endswith("]]"):
            s = s[1:-1]
        m = _PAIR_RE.match(s)
        if m is None:
            raise InputError(f"cannot parse state literal {literal!r}")
        parts = [float(g) for g in m.groups()]
    else:
        try:
            (a_re, a_im), (b_re, b_im) = literal
            parts = [float(a_re), float(a_im), float(b_re), float(b_im)]
        except (TypeError, ValueError):
            raise InputError(f"cannot parse state literal {literal!r}") from None
    alpha, beta = complex(parts[0], parts[1]), complex(parts[2], parts[3])
    norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    if norm == 0:
        raise InputError("state literal has zero norm")
    return QubitPure(alpha / norm, beta / norm)


def bloch_vector(rho: DensityState) -> tuple[float, float, float]:
    if rho.d != 2:
        raise DimensionError(f"Bloch vector needs a qubit state, got d={rho.d}")
    return tuple(float(np.real(rho.expect(PAULI[k]))) for k in "xyz")


def stddev(obs: Observable, rho: DensityState) -> float:
    mean = np.real(rho.expect(obs.matrix))
    second = np.real(rho.expect(obs.matrix @ obs.matrix))
    var = second - mean**2
    if var < -1e-12:
        raise NumericalInvariantError(f"negative variance {var:.3e}")
    return float(np.sqrt(max(var, 0.0)))


def random_pure_qubit(rng: np.random.Generator) -> QubitPure:
    """Haar-random pure qubit with real non-negative ``alpha``."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    phase = np.exp(-1j * np.angle(v[0]))
    v *= phase
    v /= np.linalg.norm(v)
    return QubitPure(complex(abs(v[0])), complex(v[1]))


def random_mixed_state(rng: np.random.Generator, d: int = 2, rank: int | None = None) -> DensityState:
    """Random full-rank (by default) density matrix from a Ginibre ensemble."""
    k = rank or d
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    return DensityState(0.5 * (rho + rho.conj().T))
