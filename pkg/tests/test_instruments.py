import numpy as np
import pytest

from edrlab.errors import InputError, PreconditionError
from edrlab.instruments import (
    PROJ_H,
    PROJ_V,
    Instrument,
    disturbance_direct,
    error_direct,
    heisenberg_observables,
    imperfect_pbs_instrument,
    lund_wiseman_model,
    pbs_model,
    pbs_unitary,
    projective_instrument,
    vpbs_instrument,
)
from edrlab.states import PAULI, DensityState, bloch_vector, random_pure_qubit, standard_state

GRID21 = np.linspace(0, np.pi / 4, 21)


def test_projective_probabilities(sz):
    inst = projective_instrument(sz)
    assert inst.probabilities(standard_state("D").density()) == pytest.approx([0.5, 0.5], abs=1e-12)
    assert inst.probabilities(standard_state("H").density())[0] == pytest.approx(1.0)


def test_projective_mean_matches_expectation(sz, random_states):
    inst = projective_instrument(sz)
    for psi in random_states:
        mean = float(np.dot(inst.values, inst.probabilities(psi)))
        ket = np.linalg.eigh(psi.rho)[1][:, -1]
        assert mean == pytest.approx(np.real(np.vdot(ket, PAULI["z"] @ ket)), abs=1e-12)


def test_pbs_unitary_action():
    u = pbs_unitary()
    hp, hm, vp, vm = np.eye(4)
    assert np.allclose(u @ vp, vm)
    assert np.allclose(u @ hp, hp)
    kraus = pbs_model().extract_instrument().kraus
    assert np.allclose(kraus[0], PROJ_H) and np.allclose(kraus[1], PROJ_V)


def test_vpbs_limits(rng):
    assert np.allclose(vpbs_instrument(0).kraus[0], PROJ_H)
    assert np.allclose(vpbs_instrument(0).kraus[1], PROJ_V)
    null = vpbs_instrument(np.pi / 4)
    for _ in range(5):
        psi = random_pure_qubit(rng).density()
        assert null.probabilities(psi) == pytest.approx([0.5, 0.5], abs=1e-12)


def test_vpbs_pi8_effect():
    e_plus = vpbs_instrument(np.pi / 8).povm[0]
    assert np.max(np.abs(e_plus - (np.eye(2) + PAULI["z"] / np.sqrt(2)) / 2)) < 1e-12


def test_theta_out_of_range():
    with pytest.raises(InputError):
        vpbs_instrument(1.0)
    with pytest.raises(InputError):
        lund_wiseman_model(-0.1)


@pytest.mark.parametrize("theta", GRID21)
def test_lund_wiseman_matches_vpbs(theta):
    lw = lund_wiseman_model(theta).extract_instrument()
    vp = vpbs_instrument(theta)
    c, s = np.cos(theta), np.sin(theta)
    assert np.max(np.abs(lw.kraus[0] - np.diag([c, s]))) < 1e-12
    assert np.max(np.abs(lw.kraus[1] - np.diag([s, c]))) < 1e-12
    for a, b in zip(lw.povm, vp.povm):
        assert np.max(np.abs(a - b)) < 1e-12


def test_lund_wiseman_distribution_on_L():
    psi = standard_state("L").density()
    lw = lund_wiseman_model(np.pi / 8).extract_instrument()
    assert lw.probabilities(psi) == pytest.approx(vpbs_instrument(np.pi / 8).probabilities(psi), abs=1e-12)


def test_incomplete_instrument_rejected():
    with pytest.raises(PreconditionError):
        Instrument([PROJ_H, 0.5 * PROJ_V], (1, -1))


def test_psd_and_completeness_everywhere(rng):
    for theta in GRID21:
        for inst in (vpbs_instrument(theta), imperfect_pbs_instrument(theta, 0.05)):
            assert np.max(np.abs(sum(inst.povm) - np.eye(2))) < 1e-10
            for e in inst.povm:
                assert np.linalg.eigvalsh(e).min() > -1e-10
            for _ in range(3):
                psi = random_pure_qubit(rng).density()
                p = inst.probabilities(psi)
                assert np.all(p >= -1e-10) and np.all(p <= 1 + 1e-10)
                out = inst.channel(psi)
                assert abs(np.trace(out) - 1) < 1e-12
                DensityState(out)


def test_dilation_reproduces_instrument():
    inst = imperfect_pbs_instrument(0.3, 0.1)
    model = inst.dilation()
    back = model.extract_instrument()
    for a, b in zip(back.kraus, inst.kraus):
        assert np.max(np.abs(a - b)) < 1e-12


def test_noise_and_disturbance_means(sz, sx, random_states):
    for theta in (0.0, 0.2, np.pi / 8, 0.7):
        model = lund_wiseman_model(theta)
        pair = heisenberg_observables(model, sz, sx)
        for op in (pair.MA, pair.MB, pair.NA, pair.DB):
            assert np.max(np.abs(op - op.conj().T)) < 1e-10
        for psi in random_states:
            joint = model.joint_state(psi)
            _, y, z = bloch_vector(psi)
            x = bloch_vector(psi)[0]
            assert np.real(joint.expect(pair.NA)) == pytest.approx((np.cos(2 * theta) - 1) * z, abs=1e-12)
            assert np.real(joint.expect(pair.DB)) == pytest.approx((np.sin(2 * theta) - 1) * x, abs=1e-12)


def test_noise_vanishes_for_projective_on_eigenstate(sz):
    model = lund_wiseman_model(0.0)
    pair = heisenberg_observables(model, sz, sz)
    joint = model.joint_state(standard_state("H").density())
    assert abs(joint.expect(pair.NA)) < 1e-15


@pytest.mark.parametrize("theta", GRID21)
def test_error_disturbance_closed_form(theta, sz, sx, random_states):
    model = lund_wiseman_model(theta)
    for psi in random_states:
        assert error_direct(model, sz, psi) == pytest.approx(2 * np.sin(theta), abs=1e-12)
        assert disturbance_direct(model, sx, psi) == pytest.approx(2 * np.sin(np.pi / 4 - theta), abs=1e-12)


def test_endpoints(sz, sx, L):
    assert error_direct(vpbs_instrument(0), sz, L) == 0
    assert error_direct(vpbs_instrument(np.pi / 4), sz, L) == pytest.approx(np.sqrt(2))
    assert disturbance_direct(vpbs_instrument(np.pi / 4), sx, L) == pytest.approx(0, abs=1e-12)
    assert disturbance_direct(vpbs_instrument(0), sx, L) == pytest.approx(np.sqrt(2))


def test_instrument_and_model_paths_agree(sz, L):
    theta = 0.4
    assert error_direct(vpbs_instrument(theta), sz, L) == pytest.approx(
        error_direct(lund_wiseman_model(theta), sz, L), abs=1e-12
    )


def test_imperfect_reduces_to_ideal():
    a, b = imperfect_pbs_instrument(0.3, 0.0), vpbs_instrument(0.3)
    for x, y in zip(a.coarse_povm(), b.povm):
        assert np.max(np.abs(x - y)) < 1e-15


def test_imperfect_floors(sz, sx, L):
    assert error_direct(imperfect_pbs_instrument(0.0, 0.02), sz, L) > 0
    assert disturbance_direct(imperfect_pbs_instrument(np.pi / 4, 0.02), sx, L) > 0


def test_imperfect_rejects_bad_extinction():
    with pytest.raises(InputError):
        imperfect_pbs_instrument(0.1, 1.0)
