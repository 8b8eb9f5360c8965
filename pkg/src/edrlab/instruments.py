"""Measurement instruments for the polarization qubit.

Signal basis is ``{|H>, |V>}``; the path (probe) qubit basis ``{|+1>, |-1>}``
maps to indices ``{0, 1}``. Joint operators act on ``signal (x) probe`` with
the signal index major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from edrlab.errors import DimensionError, InputError, NumericalInvariantError, PreconditionError
from edrlab.linalg import ATOL, as_matrix, is_unitary, tensor_product
from edrlab.states import PAULI, DensityState, Observable

PROJ_H = np.diag([1.0, 0.0]).astype(complex)
PROJ_V = np.diag([0.0, 1.0]).astype(complex)
CNOT = tensor_product(PROJ_H, PAULI["I"]) + tensor_product(PROJ_V, PAULI["x"])
THETA_MAX = np.pi / 4
_ANGLE_SLOP = 1e-12


class Instrument:
    """Outcome values paired with Kraus operators on the signal space.

    Several Kraus operators may share one outcome ``label``; they are then
    indistinguishable to the detector and are summed over when outcome
    statistics are coarse-grained.
    """

    def __init__(self, kraus, values, labels=None, strength=None, name=None):
        kraus = [as_matrix(k).copy() for k in kraus]
        if not kraus:
            raise InputError("an instrument needs at least one Kraus operator")
        d = kraus[0].shape[1]
        for k in kraus:
            if k.shape != (d, d):
                raise DimensionError(f"Kraus operator shape {k.shape} is not {d}x{d}")
            k.setflags(write=False)
        values = tuple(float(v) for v in values)
        if len(values) != len(kraus):
            raise InputError(f"{len(values)} outcome values for {len(kraus)} Kraus operators")
        if labels is None:
            labels = tuple(f"{v:+g}" for v in values)
        labels = tuple(str(lab) for lab in labels)
        if len(labels) != len(kraus):
            raise InputError("one label per Kraus operator is required")
        for lab in set(labels):
            vals = {v for v, l2 in zip(values, labels) if l2 == lab}
            if len(vals) != 1:
                raise InputError(f"outcome label {lab!r} carries several values {sorted(vals)}")
        self.kraus = tuple(kraus)
        self.values = values
        self.labels = labels
        self.strength = strength
        self.name = name
        self.povm = tuple(k.conj().T @ k for k in kraus)
        resid = float(np.max(np.abs(sum(self.povm) - np.eye(d))))
        if resid > ATOL:
            raise PreconditionError(f"POVM elements do not sum to identity ({resid:.3e})", resid)

    @property
    def d(self) -> int:
        return self.kraus[0].shape[0]

    def __len__(self):
        return len(self.kraus)

    def outcomes(self) -> list[tuple[str, float, tuple[int, ...]]]:
        """Distinct outcomes in first-appearance order: ``(label, value, kraus indices)``."""
        seen: dict[str, list[int]] = {}
        for i, lab in enumerate(self.labels):
            seen.setdefault(lab, []).append(i)
        return [(lab, self.values[idx[0]], tuple(idx)) for lab, idx in seen.items()]

    def coarse_povm(self) -> list[np.ndarray]:
        return [sum(self.povm[i] for i in idx) for _, _, idx in self.outcomes()]

    def probabilities(self, rho: DensityState) -> np.ndarray:
        """Born probabilities of the distinct outcomes."""
        return np.array([np.real(rho.expect(e)) for e in self.coarse_povm()])

    def channel(self, rho) -> np.ndarray:
        """Non-selective post-measurement state ``sum_m M_m rho M_m^dagger``."""
        r = rho.rho if isinstance(rho, DensityState) else as_matrix(rho)
        return sum(k @ r @ k.conj().T for k in self.kraus)

    def mean_operator(self) -> np.ndarray:
        """``sum_m mu_m E_m``: the signal-space image of the meter observable."""
        return sum(v * e for v, e in zip(self.values, self.povm))

    def second_moment_operator(self) -> np.ndarray:
        return sum(v * v * e for v, e in zip(self.values, self.povm))

    def heisenberg_map(self, op) -> np.ndarray:
        """``sum_m M_m^dagger op M_m``: an observable measured after this instrument."""
        op = as_matrix(op)
        return sum(k.conj().T @ op @ k for k in self.kraus)

    def dilation(self) -> "IndirectModel":
        """Indirect model reproducing this instrument exactly.

        The probe has one basis state per Kraus operator, starts in ``|0>``,
        and the coupling completes the isometry ``|psi> -> sum_k M_k|psi>|k>``.
        """
        d, n = self.d, len(self)
        iso = sum(
            np.kron(k, np.eye(n)[:, [j]]) for j, k in enumerate(self.kraus)
        )
        _, _, vh = np.linalg.svd(iso.conj().T, full_matrices=True)
        complement = vh[d:].conj().T
        u = np.zeros((d * n, d * n), dtype=complex)
        free = iter(range(complement.shape[1]))
        for col in range(d * n):
            i, l = divmod(col, n)
            u[:, col] = iso[:, i] if l == 0 else complement[:, next(free)]
        return IndirectModel(
            probe_ket=np.eye(n, dtype=complex)[0],
            coupling=u,
            readout_values=self.values,
            signal_dim=d,
            readout_labels=self.labels,
        )

    def __repr__(self):
        return f"Instrument({self.name or 'custom'}, outcomes={self.labels})"


@dataclass(frozen=True, eq=False)
class IndirectModel:
    """Signal coupled to a pure probe by ``coupling``, then probe readout.

    The readout observable is diagonal in the probe's computational basis with
    ``readout_values[k]`` on basis state ``|k>``.
    """

    probe_ket: np.ndarray
    coupling: np.ndarray
    readout_values: tuple
    signal_dim: int = 2
    readout_labels: tuple | None = None

    def __post_init__(self):
        ket = np.asarray(self.probe_ket, dtype=complex).ravel()
        if abs(np.linalg.norm(ket) - 1) > ATOL:
            raise InputError("probe state must be normalized")
        u = as_matrix(self.coupling)
        dim = self.signal_dim * ket.size
        if u.shape != (dim, dim):
            raise DimensionError(f"coupling shape {u.shape} is not {dim}x{dim}")
        if not is_unitary(u):
            raise PreconditionError("coupling is not unitary")
        values = tuple(float(v) for v in self.readout_values)
        if len(values) != ket.size:
            raise DimensionError("one readout value per probe basis state is required")
        object.__setattr__(self, "probe_ket", ket)
        object.__setattr__(self, "coupling", u)
        object.__setattr__(self, "readout_values", values)

    @property
    def probe_dim(self) -> int:
        return self.probe_ket.size

    @property
    def probe_state(self) -> DensityState:
        return DensityState.from_ket(self.probe_ket)

    @property
    def probe_readout(self) -> Observable:
        return Observable(np.diag(self.readout_values))

    def joint_state(self, psi: DensityState) -> DensityState:
        if psi.d != self.signal_dim:
            raise DimensionError(f"signal state dim {psi.d} != {self.signal_dim}")
        return DensityState(tensor_product(psi.rho, self.probe_state.rho))

    def extract_instrument(self) -> Instrument:
        """Kraus operators ``M_k = <k| U |xi>`` for each probe basis state."""
        d, n = self.signal_dim, self.probe_dim
        t = self.coupling.reshape(d, n, d, n)
        kraus = [np.einsum("ijl,l->ij", t[:, k, :, :], self.probe_ket) for k in range(n)]
        return Instrument(kraus, self.readout_values, labels=self.readout_labels)


@dataclass(frozen=True, eq=False)
class HeisenbergPair:
    MA: np.ndarray
    MB: np.ndarray
    NA: np.ndarray
    DB: np.ndarray


def projective_instrument(obs: Observable) -> Instrument:
    return Instrument(
        obs.projectors, obs.spectrum, name=f"projective({obs.name or 'observable'})"
    )


def pbs_unitary(phi: float = 0.0) -> np.ndarray:
    """Polarizing beamsplitter on ``{H1, H2, V1, V2}``: ``e^{i phi} I (+) sigma_x``."""
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = np.exp(1j * phi) * PAULI["I"]
    u[2:, 2:] = PAULI["x"]
    return u


def pbs_model(phi: float = 0.0) -> IndirectModel:
    return IndirectModel(
        probe_ket=np.array([1, 0], dtype=complex),
        coupling=pbs_unitary(phi),
        readout_values=(1.0, -1.0),
        readout_labels=("+", "-"),
    )


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (-_ANGLE_SLOP <= theta <= THETA_MAX + _ANGLE_SLOP):
        raise InputError(f"theta must lie in [0, pi/4], got {theta!r}")
    return min(max(theta, 0.0), THETA_MAX)


def w_gate(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def vpbs_instrument(theta: float) -> Instrument:
    """Strength-variable sigma_z measurement; ``theta = 0`` is projective,
    ``theta = pi/4`` the null measurement."""
    theta = _check_theta(theta)
    c, s = np.cos(theta), np.sin(theta)
    return Instrument(
        [c * PROJ_H + s * PROJ_V, s * PROJ_H + c * PROJ_V],
        (1.0, -1.0),
        labels=("+", "-"),
        strength=float(np.cos(2 * theta)),
        name=f"vpbs(theta={theta:.6g})",
    )


def lund_wiseman_model(theta: float) -> IndirectModel:
    """Probe ``|+1>``, gate ``W(theta)`` on the probe, then CNOT from the signal."""
    theta = _check_theta(theta)
    coupling = CNOT @ tensor_product(PAULI["I"], w_gate(theta))
    return IndirectModel(
        probe_ket=np.array([1, 0], dtype=complex),
        coupling=coupling,
        readout_values=(1.0, -1.0),
        readout_labels=("+", "-"),
    )


def imperfect_pbs_instrument(theta: float, extinction: float) -> Instrument:
    """VPBS whose beamsplitters leak a fraction ``extinction`` of the intensity
    into the wrong output port.

    Leaked amplitude is modelled as path-distinguishable: it does not interfere
    with the correctly routed light, so it carries H and V through separate
    Kraus operators. This gives an error floor at ``theta = 0`` and a
    disturbance floor at ``theta = pi/4`` while keeping the POVM complete.
    """
    theta = _check_theta(theta)
    e = float(extinction)
    if not (0.0 <= e < 1.0):
        raise InputError(f"extinction must lie in [0, 1), got {extinction!r}")
    c, s = np.cos(theta), np.sin(theta)
    norm = 1.0 / np.sqrt(1.0 + e)
    leak = np.sqrt(e) * norm
    kraus = [
        norm * (c * PROJ_H + s * PROJ_V),
        leak * s * PROJ_H,
        leak * c * PROJ_V,
        norm * (s * PROJ_H + c * PROJ_V),
        leak * c * PROJ_H,
        leak * s * PROJ_V,
    ]
    return Instrument(
        kraus,
        (1.0,) * 3 + (-1.0,) * 3,
        labels=("+",) * 3 + ("-",) * 3,
        strength=float(np.cos(2 * theta)),
        name=f"imperfect_vpbs(theta={theta:.6g}, extinction={e:g})",
    )


def _as_model(model) -> IndirectModel:
    return model.dilation() if isinstance(model, Instrument) else model


def heisenberg_observables(model, A: Observable, B: Observable) -> HeisenbergPair:
    """Meter and post-measurement observables pulled back to the input state.

    ``model`` may be an :class:`IndirectModel` or an :class:`Instrument` (which
    is dilated first).
    """
    model = _as_model(model)
    d, n = model.signal_dim, model.probe_dim
    for obs in (A, B):
        if obs.d != d:
            raise DimensionError(f"observable dim {obs.d} != signal dim {d}")
    u = model.coupling
    ud = u.conj().T
    eye_p, eye_s = np.eye(n), np.eye(d)
    ma = ud @ tensor_product(eye_s, np.diag(model.readout_values)) @ u
    mb = ud @ tensor_product(B.matrix, eye_p) @ u
    return HeisenbergPair(
        MA=ma,
        MB=mb,
        NA=ma - tensor_product(A.matrix, eye_p),
        DB=mb - tensor_product(B.matrix, eye_p),
    )


def _rms(op, state: DensityState) -> float:
    sq = np.real(state.expect(op @ op))
    if sq < -1e-12:
        raise NumericalInvariantError(f"negative mean square {sq:.3e}")
    return float(np.sqrt(max(sq, 0.0)))


def error_direct(model, A: Observable, psi: DensityState) -> float:
    """RMS of the noise operator on ``psi (x) xi``."""
    model = _as_model(model)
    pair = heisenberg_observables(model, A, A)
    return _rms(pair.NA, model.joint_state(psi))


def disturbance_direct(model, B: Observable, psi: DensityState) -> float:
    """RMS of the disturbance operator on ``psi (x) xi``."""
    model = _as_model(model)
    pair = heisenberg_observables(model, B, B)
    return _rms(pair.DB, model.joint_state(psi))
