from __future__ import annotations

import math

import numpy as np
import pytest

from flatmagic.state import HADAMARD, Statevector, apply_one_qubit, prepare_bloch

T_ANGLES = (math.pi / 2, math.pi / 4)


def random_state(n_qubits: int, rng: np.random.Generator) -> Statevector:
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return Statevector(v / np.linalg.norm(v))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def t_state():
    return prepare_bloch(*T_ANGLES)


@pytest.fixture
def h_t_state(t_state):
    return apply_one_qubit(t_state, 0, HADAMARD)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
