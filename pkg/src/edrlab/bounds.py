"""Preparation and error-disturbance uncertainty relations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from edrlab.errors import DimensionError, InputError
from edrlab.instruments import HeisenbergPair
from edrlab.linalg import commutator, psd_sqrt, tensor_product, trace_norm
from edrlab.states import DensityState, Observable

SLACK_TOL = 1e-10
RADICAND_TOL = 1e-10
BUSCEMI_RHS = (4.0 / (math.pi * math.e)) ** 2


class Relation(str, Enum):
    KENNARD_ROBERTSON = "kennard_robertson"
    HEISENBERG_ED = "heisenberg_ed"
    OZAWA0 = "ozawa0"
    OZAWA = "ozawa"
    BRANCIARD1 = "branciard1"
    BRANCIARD1A = "branciard1a"
    BRANCIARD2 = "branciard2"
    BUSCH_QUBIT = "busch_qubit"
    BUSCEMI_QUBIT = "buscemi_qubit"


RELATION_NAMES = tuple(r.value for r in Relation)


def parse_relation(name) -> Relation:
    try:
        return Relation(name)
    except ValueError:
        raise InputError(f"unknown relation {name!r}; valid names: {', '.join(RELATION_NAMES)}") from None


@dataclass(frozen=True)
class EdrReport:
    relation: Relation
    lhs: float
    rhs: float
    satisfied: bool
    slack: float
    out_of_model: bool = False

    @classmethod
    def of(cls, relation: Relation, lhs: float, rhs: float, out_of_model: bool = False):
        slack = float(lhs) - float(rhs)
        return cls(relation, float(lhs), float(rhs), slack >= -SLACK_TOL, slack, out_of_model)


@dataclass(frozen=True)
class RelationInputs:
    """Scalars entering the relations. ``c`` is C or its mixed-state form D.

    ``ozawa0_term`` is the commutator correction of Ozawa's first relation and
    ``bloch_a``/``bloch_b`` the Bloch axes of the two observables; each is only
    required by the relation that uses it.
    """

    eps: float
    eta: float
    sigma_a: float = 1.0
    sigma_b: float = 1.0
    c: float = 1.0
    bloch_a: tuple | None = None
    bloch_b: tuple | None = None
    ozawa0_term: float | None = None


def _check_dims(A: Observable, B: Observable, rho: DensityState) -> None:
    if not (A.d == B.d == rho.d):
        raise DimensionError(f"observables ({A.d}, {B.d}) and state ({rho.d}) dims differ")


def commutator_bound_C(A: Observable, B: Observable, rho: DensityState) -> float:
    _check_dims(A, B, rho)
    return 0.5 * abs(rho.expect(commutator(A.matrix, B.matrix)))


def mixed_bound_D(A: Observable, B: Observable, rho: DensityState) -> float:
    """``Tr|sqrt(rho) [A, B] sqrt(rho)| / 2``; equals C on pure states."""
    _check_dims(A, B, rho)
    s = psd_sqrt(rho.rho)
    return 0.5 * trace_norm(s @ commutator(A.matrix, B.matrix) @ s)


def ozawa0_term(pair: HeisenbergPair, A: Observable, B: Observable, state: DensityState) -> float:
    """``|<[N(A), B]> + <[A, D(B)]>| / 2`` on the joint signal-probe state."""
    n = pair.NA.shape[0] // A.d
    if state.d != pair.NA.shape[0]:
        raise DimensionError(f"joint state dim {state.d} != {pair.NA.shape[0]}")
    a = tensor_product(A.matrix, np.eye(n))
    b = tensor_product(B.matrix, np.eye(n))
    return 0.5 * abs(state.expect(commutator(pair.NA, b)) + state.expect(commutator(a, pair.DB)))


def ozawa0_lhs(pair: HeisenbergPair, A: Observable, B: Observable, state: DensityState) -> float:
    eps = math.sqrt(max(np.real(state.expect(pair.NA @ pair.NA)), 0.0))
    eta = math.sqrt(max(np.real(state.expect(pair.DB @ pair.DB)), 0.0))
    return eps * eta + ozawa0_term(pair, A, B, state)


def _guarded_sqrt(x: float, what: str) -> float:
    if x < -RADICAND_TOL:
        raise InputError(f"negative radicand in {what}: {x:.3e}")
    return math.sqrt(max(x, 0.0))


def _tilde(x: float) -> tuple[float, bool]:
    rad = 1.0 - x * x / 4.0
    if rad < 0.0:
        return 0.0, True
    return x * math.sqrt(rad), False


def evaluate_relation(relation, inputs: RelationInputs) -> EdrReport:
    rel = parse_relation(relation) if not isinstance(relation, Relation) else relation
    eps, eta, sa, sb, c = inputs.eps, inputs.eta, inputs.sigma_a, inputs.sigma_b, inputs.c
    for name in ("eps", "eta", "sigma_a", "sigma_b", "c"):
        if getattr(inputs, name) < 0:
            raise InputError(f"{name} must be non-negative, got {getattr(inputs, name)!r}")

    if rel is Relation.KENNARD_ROBERTSON:
        return EdrReport.of(rel, sa * sb, c)
    if rel is Relation.HEISENBERG_ED:
        return EdrReport.of(rel, eps * eta, c)
    if rel is Relation.OZAWA0:
        if inputs.ozawa0_term is None:
            raise InputError("ozawa0 needs the commutator term (ozawa0_term)")
        return EdrReport.of(rel, eps * eta + inputs.ozawa0_term, c)
    if rel is Relation.OZAWA:
        return EdrReport.of(rel, eps * eta + eps * sb + sa * eta, c)
    if rel is Relation.BRANCIARD1:
        root = _guarded_sqrt(sa * sa * sb * sb - c * c, "branciard1")
        lhs = eps**2 * sb**2 + sa**2 * eta**2 + 2 * eps * eta * root
        return EdrReport.of(rel, lhs, c * c)
    if rel is Relation.BRANCIARD1A:
        return EdrReport.of(rel, eps * sb + sa * eta, c)
    if rel is Relation.BRANCIARD2:
        if c > 1.0 + RADICAND_TOL:
            raise InputError(f"branciard2 requires C <= 1, got {c!r}")
        et, oom_e = _tilde(eps)
        ht, oom_h = _tilde(eta)
        root = math.sqrt(max(1.0 - c * c, 0.0))
        lhs = et * et + ht * ht + 2 * et * ht * root
        return EdrReport.of(rel, lhs, c * c, out_of_model=oom_e or oom_h)
    if rel is Relation.BUSCH_QUBIT:
        if inputs.bloch_a is None or inputs.bloch_b is None:
            raise InputError("busch_qubit needs the Bloch axes bloch_a and bloch_b")
        a, b = np.asarray(inputs.bloch_a, float), np.asarray(inputs.bloch_b, float)
        rhs = math.sqrt(2.0) * (np.linalg.norm(a - b) + np.linalg.norm(a + b) - 2.0)
        return EdrReport.of(rel, eps**2 + eta**2, rhs)
    if rel is Relation.BUSCEMI_QUBIT:
        return EdrReport.of(rel, (eps**2 + 1 / 3) * (eta**2 + 1 / 3), BUSCEMI_RHS)
    raise AssertionError(rel)


def evaluate_all(inputs: RelationInputs, relations=None) -> list[EdrReport]:
    """Reports for ``relations`` (all by default) in the given order.

    Relations whose optional inputs are missing are skipped when running the
    default set.
    """
    if relations is None:
        out = []
        for rel in Relation:
            if rel is Relation.OZAWA0 and inputs.ozawa0_term is None:
                continue
            if rel is Relation.BUSCH_QUBIT and inputs.bloch_a is None:
                continue
            out.append(evaluate_relation(rel, inputs))
        return out
    return [evaluate_relation(r, inputs) for r in relations]
