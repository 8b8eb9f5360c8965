"""Experimental procedures for the measurement error and disturbance.

Three exact routes (three-state, two-state, weak-valued joint probabilities),
the weak-probe cascade of weak probe -> main instrument -> projective
post-measurement, and a finite-shot photon-counting simulator for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from edrlab.errors import DimensionError, InputError, NumericalInvariantError, PreconditionError
from edrlab.instruments import Instrument
from edrlab.linalg import as_matrix
from edrlab.states import DensityState, Observable

DEFAULT_PROBE_STRENGTH = 0.104
EPS2_CLAMP = -1e-9
ROUNDOFF_ULPS = 64
STRENGTH_MIN = 1e-9
CHUNK_SHOTS = 1 << 20


def _check_dims(instr: Instrument, A: Observable, psi: DensityState) -> None:
    if not (instr.d == A.d == psi.d):
        raise DimensionError(f"instrument d={instr.d}, observable d={A.d}, state d={psi.d}")


def _sandwich(x, op, rho) -> float:
    """``Tr[op X rho X^dagger]``: expectation in the unnormalized state ``X rho X^dagger``."""
    return float(np.real(np.trace(op @ x @ rho @ x.conj().T)))


def _finish_eps(eps2: float, scale: float = 1.0) -> float:
    """Square root of a squared RMS formed as a difference of terms of size ``scale``.

    A result within ``ROUNDOFF_ULPS`` ulp of ``scale`` is cancellation noise
    and is returned as zero; the square root would otherwise turn 1e-16 of
    round-off into 1e-8 of error.
    """
    if eps2 < EPS2_CLAMP:
        raise NumericalInvariantError(f"squared error {eps2:.3e} is negative")
    if abs(eps2) <= ROUNDOFF_ULPS * np.finfo(float).eps * scale:
        return 0.0
    return float(np.sqrt(max(eps2, 0.0)))


def _three_state(meter, meter_sq, target: Observable, psi: DensityState) -> float:
    rho, a = psi.rho, target.matrix
    eye = np.eye(target.d)
    terms = (
        np.real(psi.expect(meter_sq)),
        np.real(psi.expect(a @ a)),
        -_sandwich(eye + a, meter, rho),
        _sandwich(a, meter, rho),
        _sandwich(eye, meter, rho),
    )
    return _finish_eps(sum(terms), sum(map(abs, terms)))


def _two_state(meter, meter_sq, target: Observable, psi: DensityState) -> float:
    rho, a = psi.rho, target.matrix
    eye = np.eye(target.d)
    terms = (
        np.real(psi.expect(meter_sq)),
        np.real(psi.expect(a @ a)),
        -0.5 * _sandwich(eye + a, meter, rho),
        0.5 * _sandwich(eye - a, meter, rho),
    )
    return _finish_eps(sum(terms), sum(map(abs, terms)))


def three_state_error(instr: Instrument, A: Observable, psi: DensityState) -> float:
    """Error from meter means on the unnormalized inputs ``(I+A)psi``, ``A psi``, ``psi``."""
    _check_dims(instr, A, psi)
    return _three_state(instr.mean_operator(), instr.second_moment_operator(), A, psi)


def two_state_error(instr: Instrument, A: Observable, psi: DensityState) -> float:
    """Error from meter means on the unnormalized inputs ``(I+A)psi`` and ``(I-A)psi``."""
    _check_dims(instr, A, psi)
    return _two_state(instr.mean_operator(), instr.second_moment_operator(), A, psi)


def three_state_disturbance(instr: Instrument, B: Observable, psi: DensityState) -> float:
    """Three-state method applied to a projective ``B`` measured after ``instr``."""
    _check_dims(instr, B, psi)
    b = B.matrix
    return _three_state(instr.heisenberg_map(b), instr.heisenberg_map(b @ b), B, psi)


def two_state_disturbance(instr: Instrument, B: Observable, psi: DensityState) -> float:
    _check_dims(instr, B, psi)
    b = B.matrix
    return _two_state(instr.heisenberg_map(b), instr.heisenberg_map(b @ b), B, psi)


def weak_joint_probabilities(instr: Instrument, A: Observable, psi: DensityState) -> np.ndarray:
    """Quasi-probabilities ``P_W[j, k] = Re Tr(rho E_k Pi_j)``.

    Rows follow ``A.spectrum``; columns follow the instrument's Kraus order.
    Entries can be negative.
    """
    _check_dims(instr, A, psi)
    return np.array(
        [[np.real(psi.expect(e @ p)) for e in instr.povm] for p in A.projectors]
    )


def error_from_weak_joint(pw: np.ndarray, instr: Instrument, A: Observable) -> float:
    """``sqrt(sum (mu_k - lambda_j)^2 P_W[j, k])``."""
    lam = np.asarray(A.spectrum)[:, None]
    mu = np.asarray(instr.values)[None, :]
    terms = (mu - lam) ** 2 * pw
    return _finish_eps(float(terms.sum()), float(np.abs(terms).sum()))


def weak_value(effect, A: Observable, psi: DensityState) -> float:
    """Real part of the weak value of ``A`` conditioned on POVM element ``effect``."""
    effect = as_matrix(effect)
    p = np.real(psi.expect(effect))
    if p <= 1e-12:
        raise PreconditionError(f"outcome probability {p:.3e} is too small to condition on", p)
    return float(np.real(psi.expect(effect @ A.matrix)) / p)


class WeakProbe:
    """Qubit-meter probe of a +-1 observable with coupling ``g``.

    Kraus operators ``W_w = (cos g I + w sin g A) / sqrt 2`` for ``w = +1, -1``;
    the measurement strength is ``sin 2g``.
    """

    def __init__(self, target: Observable, g: float):
        if not target.squares_to_identity():
            raise PreconditionError("weak-probe target must square to the identity")
        self.target = target
        self.g = float(g)
        c, s = np.cos(self.g), np.sin(self.g)
        eye = np.eye(target.d)
        self.kraus = tuple(
            (c * eye + w * s * target.matrix) / np.sqrt(2.0) for w in (1, -1)
        )

    @classmethod
    def from_strength(cls, target: Observable, strength: float) -> "WeakProbe":
        if not (0.0 <= strength <= 1.0):
            raise InputError(f"probe strength must lie in [0, 1], got {strength!r}")
        return cls(target, 0.5 * np.arcsin(strength))

    @property
    def strength(self) -> float:
        return float(np.sin(2 * self.g))

    def as_instrument(self) -> Instrument:
        return Instrument(self.kraus, (1.0, -1.0), labels=("+", "-"), strength=self.strength)

    def channel(self, rho) -> np.ndarray:
        r = rho.rho if isinstance(rho, DensityState) else as_matrix(rho)
        return sum(w @ r @ w.conj().T for w in self.kraus)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probabilities over ordered stages.

    ``axes`` names each stage, ``labels[i]`` and ``values[i]`` list its
    outcomes; ``probs`` has one dimension per stage.
    """

    axes: tuple
    labels: tuple
    values: tuple
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        shape = tuple(len(v) for v in self.values)
        if p.shape != shape:
            raise DimensionError(f"probability array {p.shape} does not match axes {shape}")
        if abs(p.sum() - 1.0) > 1e-10:
            raise PreconditionError(f"probabilities sum to {p.sum():.12g}")
        if p.min() < -1e-12:
            raise PreconditionError(f"negative probability {p.min():.3e}")
        object.__setattr__(self, "probs", p)

    def marginal(self, keep) -> "JointDistribution":
        keep = tuple(keep)
        idx = [self.axes.index(k) for k in keep]
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        p = self.probs.sum(axis=drop) if drop else self.probs
        remaining = [i for i in range(len(self.axes)) if i not in drop]
        p = np.moveaxis(p, [remaining.index(i) for i in idx], list(range(len(idx))))
        return JointDistribution(
            keep,
            tuple(self.labels[i] for i in idx),
            tuple(self.values[i] for i in idx),
            p,
        )


def cascade_distribution(
    probe: WeakProbe, main: Instrument, post: Observable, psi: DensityState
) -> JointDistribution:
    """Exact ``P(w, m, b)`` for weak probe, main instrument, projective post-measurement."""
    if not (probe.target.d == main.d == post.d == psi.d):
        raise DimensionError("probe, instrument, post-measurement and state dims differ")
    outcomes = main.outcomes()
    p = np.zeros((2, len(outcomes), len(post.projectors)))
    for iw, w in enumerate(probe.kraus):
        after_probe = w @ psi.rho @ w.conj().T
        for im, (_, _, kidx) in enumerate(outcomes):
            after_main = sum(main.kraus[k] @ after_probe @ main.kraus[k].conj().T for k in kidx)
            for ib, proj in enumerate(post.projectors):
                p[iw, im, ib] = np.real(np.trace(proj @ after_main))
    return JointDistribution(
        axes=("w", "m", "b"),
        labels=(("+", "-"), tuple(o[0] for o in outcomes), tuple(f"{v:+g}" for v in post.spectrum)),
        values=((1.0, -1.0), tuple(o[1] for o in outcomes), tuple(post.spectrum)),
        probs=p,
    )


def _correlation(dist: JointDistribution, second: str) -> float:
    """``sum w * v * P(w, v)`` over the probe axis and ``second``."""
    pm = dist.marginal(("w", second))
    return float(np.asarray(pm.values[0]) @ pm.probs @ np.asarray(pm.values[1]))


def _from_correlation(corr: float, strength: float, moments) -> float:
    if abs(strength) <= STRENGTH_MIN:
        raise PreconditionError(f"probe strength {strength!r} is too close to zero")
    m2, a2 = moments
    cross = 2.0 * corr / strength
    return _finish_eps(m2 + a2 - cross, abs(m2) + abs(a2) + abs(cross))


def weak_probe_error(
    dist: JointDistribution, strength: float, moments: tuple[float, float] = (1.0, 1.0)
) -> float:
    """Error from the probe/main correlation, ``strength = sin 2g``.

    ``moments`` are ``(<M_A^2>, <A^2>)``; both are 1 for +-1 observables,
    in which case the result is exact for any coupling.
    """
    return _from_correlation(_correlation(dist, "m"), strength, moments)


def weak_probe_disturbance(
    dist: JointDistribution, strength: float, moments: tuple[float, float] = (1.0, 1.0)
) -> float:
    """Disturbance from the probe/post-measurement correlation, main outcome summed out."""
    return _from_correlation(_correlation(dist, "b"), strength, moments)


@dataclass(frozen=True, eq=False)
class ShotRecord:
    counts: np.ndarray
    shots: int
    seed: int
    dist: JointDistribution

    def __post_init__(self):
        if int(self.counts.sum()) != self.shots:
            raise NumericalInvariantError("counts do not sum to the number of shots")

    def frequencies(self) -> JointDistribution:
        return JointDistribution(
            self.dist.axes, self.dist.labels, self.dist.values, self.counts / self.shots
        )


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Philox (counter-based) generator keyed by ``seed`` and a stream path."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, stream)])
    return np.random.Generator(np.random.Philox(ss))


def _multinomial(rng: np.random.Generator, n: int, p: np.ndarray) -> np.ndarray:
    """Chained conditional binomials; exact multinomial in ``len(p)`` draws."""
    counts = np.zeros(p.size, dtype=np.int64)
    left, mass = n, 1.0
    for i in range(p.size - 1):
        if left == 0:
            break
        q = min(max(p[i] / mass, 0.0), 1.0) if mass > 0 else 0.0
        counts[i] = rng.binomial(left, q)
        left -= counts[i]
        mass -= p[i]
    counts[-1] += left
    return counts


def sample_shots(
    dist: JointDistribution, shots: int, seed: int, stream: tuple[int, ...] = ()
) -> ShotRecord:
    """Draw ``shots`` detection events from ``dist``.

    Shots are split into fixed chunks of ``CHUNK_SHOTS``; chunk ``k`` uses the
    RNG stream ``(seed, *stream, k)``, so any partition of chunks across
    workers merges to the same counts.
    """
    shots = int(shots)
    if shots <= 0:
        raise InputError(f"shots must be positive, got {shots!r}")
    p = np.clip(dist.probs.ravel(), 0.0, None)
    p = p / p.sum()
    counts = np.zeros(p.size, dtype=np.int64)
    for k, start in enumerate(range(0, shots, CHUNK_SHOTS)):
        n = min(CHUNK_SHOTS, shots - start)
        counts += _multinomial(rng_for(seed, *stream, k), n, p)
    return ShotRecord(counts.reshape(dist.probs.shape), shots, int(seed), dist)


def estimate_from_counts(
    rec: ShotRecord, strength: float, mode: str = "error"
) -> tuple[float, float]:
    """Plug observed frequencies into the weak-probe formula.

    Returns ``(estimate, stderr)``. The correlation ``T = sum w v f(w, v)`` of
    +-1 products has binomial variance ``(1 - T^2) / N``, giving
    ``se2 = 2 sqrt((1 - T^2)/N) / strength`` for the squared quantity. The
    standard error of its square root is ``sqrt(est^2 + se2) - est``, the delta
    method for a resolved estimate and ``sqrt(se2)`` at zero. Negative squared
    estimates clamp to zero.
    """
    second = {"error": "m", "disturbance": "b"}.get(mode)
    if second is None:
        raise InputError(f"mode must be 'error' or 'disturbance', not {mode!r}")
    if abs(strength) <= STRENGTH_MIN:
        raise PreconditionError(f"probe strength {strength!r} is too close to zero")
    corr = _correlation(rec.frequencies(), second)
    est2 = 2.0 - 2.0 * corr / strength
    est = float(np.sqrt(max(est2, 0.0)))
    se2 = 2.0 * np.sqrt(max(1.0 - corr**2, 0.0) / rec.shots) / abs(strength)
    return est, float(np.sqrt(est**2 + se2) - est)
