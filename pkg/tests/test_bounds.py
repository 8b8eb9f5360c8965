import math

import numpy as np
import pytest

from edrlab import bounds
from edrlab.bounds import Relation, RelationInputs, evaluate_relation
from edrlab.errors import DimensionError, InputError
from edrlab.instruments import heisenberg_observables, lund_wiseman_model
from edrlab.states import DensityState, random_mixed_state, random_pure_qubit, standard_state, stddev

GRID21 = np.linspace(0, np.pi / 4, 21)


def ideal(theta):
    return 2 * np.sin(theta), 2 * np.sin(np.pi / 4 - theta)


def test_commutator_bound_examples(sz, sx, L):
    assert bounds.commutator_bound_C(sz, sx, L) == pytest.approx(1.0, abs=1e-15)
    assert bounds.commutator_bound_C(sz, sx, DensityState.maximally_mixed()) == 0
    assert bounds.commutator_bound_C(sz, sx, standard_state("H").density()) == 0


def test_dimension_mismatch(sz, sx):
    with pytest.raises(DimensionError):
        bounds.commutator_bound_C(sz, sx, DensityState.maximally_mixed(3))


def test_D_examples(sz, sx, rng):
    assert bounds.mixed_bound_D(sz, sx, DensityState.maximally_mixed()) == pytest.approx(1.0, abs=1e-12)
    for _ in range(20):
        psi = random_pure_qubit(rng).density()
        assert bounds.mixed_bound_D(sz, sx, psi) == pytest.approx(bounds.commutator_bound_C(sz, sx, psi), abs=1e-10)
    for _ in range(20):
        rho = random_mixed_state(rng)
        assert bounds.mixed_bound_D(sz, sx, rho) >= bounds.commutator_bound_C(sz, sx, rho) - 1e-10


def test_D_diagonal_state_brute_force(sz, sx):
    rho = np.diag([0.9, 0.1])
    # sqrt(rho) [sz, sx] sqrt(rho) = 2i sqrt(.09) sigma_y-like; singular values via SVD
    s = np.diag(np.sqrt([0.9, 0.1]))
    oracle = 0.5 * np.linalg.svd(s @ (sz.matrix @ sx.matrix - sx.matrix @ sz.matrix) @ s, compute_uv=False).sum()
    assert oracle == pytest.approx(0.6, abs=1e-12)
    assert bounds.mixed_bound_D(sz, sx, DensityState(rho)) == pytest.approx(oracle, abs=1e-12)


def _ozawa0(theta, A, B, psi):
    model = lund_wiseman_model(theta)
    pair = heisenberg_observables(model, A, B)
    return pair, model.joint_state(psi)


def test_ozawa0_unbiased_case(sz, random_states):
    for psi in random_states:
        pair, joint = _ozawa0(0.3, sz, sz, psi)
        assert bounds.ozawa0_term(pair, sz, sz, joint) < 1e-12
        eps = math.sqrt(np.real(joint.expect(pair.NA @ pair.NA)))
        eta = math.sqrt(np.real(joint.expect(pair.DB @ pair.DB)))
        assert bounds.ozawa0_lhs(pair, sz, sz, joint) == pytest.approx(eps * eta, abs=1e-12)


def test_ozawa0_pi8(sz, sx, L):
    pair, joint = _ozawa0(np.pi / 8, sz, sx, L)
    lhs = bounds.ozawa0_lhs(pair, sz, sx, joint)
    assert lhs >= 1 - 1e-10
    eps, eta = ideal(np.pi / 8)
    assert eps * eta == pytest.approx(2 - np.sqrt(2), abs=1e-12)
    # brute-force 4x4 commutator oracle for the correction term
    a = np.kron(sz.matrix, np.eye(2))
    b = np.kron(sx.matrix, np.eye(2))
    r = joint.rho
    term = 0.5 * abs(np.trace(r @ (pair.NA @ b - b @ pair.NA)) + np.trace(r @ (a @ pair.DB - pair.DB @ a)))
    assert lhs == pytest.approx(eps * eta + term, abs=1e-12)


def test_ozawa0_theta0(sz, sx, L):
    pair, joint = _ozawa0(0.0, sz, sx, L)
    assert np.real(joint.expect(pair.NA @ pair.NA)) == pytest.approx(0, abs=1e-15)
    assert bounds.ozawa0_lhs(pair, sz, sx, joint) >= 1 - 1e-10


def test_heisenberg_violated_at_pi8():
    eps, eta = ideal(np.pi / 8)
    rep = evaluate_relation("heisenberg_ed", RelationInputs(eps, eta, c=1.0))
    assert rep.lhs == pytest.approx(0.5857864376, abs=1e-10)
    assert not rep.satisfied and rep.slack < 0


def test_heisenberg_violation_region():
    for theta in GRID21[1:-1]:
        assert evaluate_relation(Relation.HEISENBERG_ED, RelationInputs(*ideal(theta))).slack < 0


def test_branciard2_saturation():
    for theta in GRID21:
        rep = evaluate_relation("branciard2", RelationInputs(*ideal(theta), c=1.0))
        assert rep.lhs == pytest.approx(1.0, abs=1e-10)
        assert rep.satisfied


def test_branciard2_out_of_model_flag():
    rep = evaluate_relation("branciard2", RelationInputs(2.1, 0.5, c=1.0))
    assert rep.out_of_model
    with pytest.raises(InputError):
        evaluate_relation("branciard2", RelationInputs(0.5, 0.5, c=1.5))


def test_branciard2_monotone():
    c = 0.7
    grid = np.linspace(0, 2, 41)
    for fixed in (0.1, 0.8, 1.5):
        lhs = [evaluate_relation("branciard2", RelationInputs(x, fixed, c=c)).lhs for x in grid[:21]]
        assert np.all(np.diff(lhs) >= -1e-15)  # tilde is increasing on [0, sqrt2]
        lhs = [evaluate_relation("branciard2", RelationInputs(fixed, x, c=c)).lhs for x in grid[:21]]
        assert np.all(np.diff(lhs) >= -1e-15)


def test_constants():
    rep = evaluate_relation("busch_qubit", RelationInputs(0, 0, bloch_a=(0, 0, 1), bloch_b=(1, 0, 0)))
    assert rep.rhs == pytest.approx(2 * (2 - np.sqrt(2)), abs=1e-12)
    rep = evaluate_relation("buscemi_qubit", RelationInputs(0, 0))
    assert rep.rhs == pytest.approx((4 / (np.pi * np.e)) ** 2, abs=1e-12)
    assert round(rep.rhs, 3) == 0.219


def test_missing_inputs():
    with pytest.raises(InputError):
        evaluate_relation("ozawa0", RelationInputs(1, 1))
    with pytest.raises(InputError):
        evaluate_relation("busch_qubit", RelationInputs(1, 1))
    with pytest.raises(InputError):
        evaluate_relation("nope", RelationInputs(1, 1))
    with pytest.raises(InputError):
        evaluate_relation("ozawa", RelationInputs(-1, 1))


def test_branciard1_radicand_guard():
    with pytest.raises(InputError):
        evaluate_relation("branciard1", RelationInputs(1, 1, sigma_a=0.5, sigma_b=0.5, c=1.0))


def test_satisfied_matches_slack():
    for eps in np.linspace(0, 2, 9):
        rep = evaluate_relation("ozawa", RelationInputs(eps, 0.3, c=1.0))
        assert rep.satisfied == (rep.slack >= -1e-10)


def test_evaluate_all_skips_missing_optional_inputs():
    names = [r.relation for r in bounds.evaluate_all(RelationInputs(1, 1))]
    assert Relation.OZAWA0 not in names and Relation.BUSCH_QUBIT not in names
    assert len(names) == len(Relation) - 2


def test_universality_grid(sz, sx, random_states):
    checked = ("ozawa0", "ozawa", "branciard1", "branciard1a", "branciard2")
    for theta in GRID21:
        model = lund_wiseman_model(theta)
        pair = heisenberg_observables(model, sz, sx)
        for psi in random_states:
            joint = model.joint_state(psi)
            eps, eta = ideal(theta)
            inputs = RelationInputs(
                eps, eta, stddev(sz, psi), stddev(sx, psi), bounds.commutator_bound_C(sz, sx, psi),
                ozawa0_term=bounds.ozawa0_term(pair, sz, sx, joint),
            )
            reports = {r.relation.value: r for r in bounds.evaluate_all(inputs, checked)}
            assert all(r.satisfied for r in reports.values()), reports
            if reports["branciard1"].satisfied:
                assert reports["branciard1a"].satisfied
