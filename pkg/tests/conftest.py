import numpy as np
import pytest

from edrlab.states import pauli_observable, random_pure_qubit, standard_state

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


@pytest.fixture
def sz():
    return pauli_observable("sigma_z")


@pytest.fixture
def sx():
    return pauli_observable("sigma_x")


@pytest.fixture
def L():
    return standard_state("L").density()


@pytest.fixture
def random_states(rng):
    return [random_pure_qubit(rng).density() for _ in range(10)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
