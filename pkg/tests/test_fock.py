import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edrlab.errors import DimensionError
from edrlab.fock import FockSpace, restrict_to_single_photon, stokes_means, stokes_operator
from edrlab.linalg import is_hermitian
from edrlab.states import PAULI


@pytest.fixture
def space():
    return FockSpace(2)


def test_annihilation_action(space):
    ax = space.annihilation("x")
    for n in range(3):
        for m in range(3):
            out = ax @ space.basis(n, m)
            expected = np.sqrt(n) * space.basis(n - 1, m) if n else np.zeros(space.dim)
            assert np.allclose(out, expected)


def test_number_operators_diagonal(space):
    for mode in ("x", "y"):
        n = space.number(mode)
        assert np.allclose(n, np.diag(np.diag(n)))
        assert set(np.real(np.diag(n)).round(12)) <= {0.0, 1.0, 2.0}


@pytest.mark.parametrize("index", range(4))
def test_stokes_hermitian(space, index):
    assert is_hermitian(stokes_operator(index, space))


def test_s1_on_H(space):
    h = space.basis(1, 0)
    assert np.vdot(h, stokes_operator(1, space) @ h) == 1


def test_s0_mean_is_one_and_field_mean_zero(space):
    alpha, beta = 0.6, 0.8j
    psi = space.single_photon_state(alpha, beta)
    assert np.vdot(psi, stokes_operator(0, space) @ psi) == pytest.approx(1.0, abs=1e-15)
    for mode in ("x", "y"):
        assert abs(np.vdot(psi, space.annihilation(mode) @ psi)) < 1e-15
        assert abs(np.vdot(psi, space.creation(mode) @ psi)) < 1e-15


@pytest.mark.parametrize("index,key", [(0, "I"), (1, "z"), (2, "x"), (3, "y")])
def test_restriction_is_pauli(space, index, key):
    assert np.array_equal(restrict_to_single_photon(stokes_operator(index, space), space), PAULI[key])


def test_restrict_s3_against_explicit_block(space):
    s3 = stokes_operator(3, space)
    i_h, i_v = space.index(1, 0), space.index(0, 1)
    block = np.array([[s3[i_h, i_h], s3[i_h, i_v]], [s3[i_v, i_h], s3[i_v, i_v]]])
    assert np.array_equal(restrict_to_single_photon(s3, space), block)
    assert np.array_equal(block, np.array([[0, -1j], [1j, 0]]))


def test_restriction_holds_for_larger_cutoffs():
    for cutoff in (1, 3):
        sp = FockSpace(cutoff)
        for index, key in ((1, "z"), (2, "x"), (3, "y")):
            assert np.array_equal(restrict_to_single_photon(stokes_operator(index, sp), sp), PAULI[key])


def test_cutoff_zero_is_valid_but_has_no_single_photon_sector():
    sp = FockSpace(0)
    assert np.array_equal(stokes_operator(2, sp), np.zeros((1, 1)))
    with pytest.raises(DimensionError):
        restrict_to_single_photon(stokes_operator(1, sp), sp)


def test_two_photon_sector_visible_at_default_cutoff(space):
    # truncation keeps |1,1> -> sqrt2 |2,0> couplings from a_x^dag a_y
    s2 = stokes_operator(2, space)
    assert s2[space.index(2, 0), space.index(1, 1)] == pytest.approx(np.sqrt(2))


amp = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(ar=amp, ai=amp, br=amp, bi=amp)
def test_stokes_means_match_jones_vector(ar, ai, br, bi):
    a, b = complex(ar, ai), complex(br, bi)
    norm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if norm < 1e-3:
        return
    a, b = a / norm, b / norm
    s0, s1, s2, s3 = stokes_means(FockSpace().single_photon_state(a, b))
    assert s1 == pytest.approx(abs(a) ** 2 - abs(b) ** 2, abs=1e-12)
    assert s2 == pytest.approx(2 * (a.conjugate() * b).real, abs=1e-12)
    assert s3 == pytest.approx(2 * (a.conjugate() * b).imag, abs=1e-12)
    assert abs(s1**2 + s2**2 + s3**2 - s0**2) < 1e-12
