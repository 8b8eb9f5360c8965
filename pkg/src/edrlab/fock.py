"""Two-mode truncated Fock space and quantized Stokes operators.

Basis states ``|n, m>`` (``n`` photons polarized along x, ``m`` along y) are
ordered with ``n`` major: index ``n * (cutoff + 1) + m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from edrlab.errors import DimensionError, InputError
from edrlab.linalg import as_matrix

DEFAULT_CUTOFF = 2


@dataclass(frozen=True)
class FockSpace:
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise InputError(f"cutoff must be a non-negative integer, got {self.cutoff!r}")

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.levels**2

    def index(self, n: int, m: int) -> int:
        if not (0 <= n <= self.cutoff and 0 <= m <= self.cutoff):
            raise InputError(f"|{n},{m}> lies outside cutoff {self.cutoff}")
        return n * self.levels + m

    def basis(self, n: int, m: int) -> np.ndarray:
        ket = np.zeros(self.dim, dtype=complex)
        ket[self.index(n, m)] = 1.0
        return ket

    def _single_mode_lowering(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.levels, dtype=float)), k=1).astype(complex)

    def annihilation(self, mode: str) -> np.ndarray:
        a = self._single_mode_lowering()
        eye = np.eye(self.levels, dtype=complex)
        if mode == "x":
            return np.kron(a, eye)
        if mode == "y":
            return np.kron(eye, a)
        raise InputError(f"mode must be 'x' or 'y', not {mode!r}")

    def creation(self, mode: str) -> np.ndarray:
        return self.annihilation(mode).conj().T

    def number(self, mode: str) -> np.ndarray:
        return self.creation(mode) @ self.annihilation(mode)

    def single_photon_state(self, alpha: complex, beta: complex) -> np.ndarray:
        """``alpha |1,0> + beta |0,1>`` embedded in the truncated space."""
        if self.cutoff < 1:
            raise DimensionError("cutoff 0 has no single-photon sector")
        return alpha * self.basis(1, 0) + beta * self.basis(0, 1)


def stokes_operator(index: int, space: FockSpace | None = None) -> np.ndarray:
    """Quantized Stokes operator ``s_index`` on the truncated two-mode space."""
    space = space or FockSpace()
    ax, ay = space.annihilation("x"), space.annihilation("y")
    axd, ayd = ax.conj().T, ay.conj().T
    if index == 0:
        return axd @ ax + ayd @ ay
    if index == 1:
        return axd @ ax - ayd @ ay
    if index == 2:
        return axd @ ay + ax @ ayd
    if index == 3:
        return -1j * (axd @ ay - ax @ ayd)
    raise InputError(f"Stokes index must be 0..3, not {index!r}")


def restrict_to_single_photon(x, space: FockSpace | None = None) -> np.ndarray:
    """2x2 block of ``x`` in the ordered basis ``{|1,0> = |H>, |0,1> = |V>}``."""
    space = space or FockSpace()
    x = as_matrix(x)
    if x.shape != (space.dim, space.dim):
        raise DimensionError(f"operator shape {x.shape} does not match Fock dim {space.dim}")
    if space.cutoff < 1:
        raise DimensionError("cutoff 0 has no single-photon sector")
    idx = [space.index(1, 0), space.index(0, 1)]
    return x[np.ix_(idx, idx)].copy()


def stokes_means(ket: np.ndarray, space: FockSpace | None = None) -> np.ndarray:
    """Real expectation values ``(<s0>, <s1>, <s2>, <s3>)`` in a pure state."""
    space = space or FockSpace()
    ket = np.asarray(ket, dtype=complex)
    return np.array(
        [np.real(ket.conj() @ stokes_operator(i, space) @ ket) for i in range(4)]
    )
