from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatmagic.measures import stabilizer_entropy
from flatmagic.pauli import (
    PauliString,
    enumerate_paulis,
    pauli_expectation,
    pauli_spectrum,
    xi_norm,
)
from flatmagic.state import new_basis_state, rxx_state, zero_state

from conftest import random_state


def dense_expectation(state, p: PauliString) -> complex:
    psi = state.amplitudes
    return complex(np.vdot(psi, p.matrix() @ psi))


class TestPauliString:
    def test_label_round_trip(self):
        for label in ["I", "X", "Y", "Z", "XYZI", "ZZYX"]:
            assert PauliString.from_label(label).label == label

    def test_rightmost_letter_is_qubit_zero(self):
        p = PauliString.from_label("IX")
        assert (p.x_mask, p.z_mask) == (1, 0)

    def test_y_decoding(self):
        p = PauliString.from_label("Y")
        assert (p.x_mask, p.z_mask) == (1, 1)
        np.testing.assert_allclose(p.matrix(), [[0, -1j], [1j, 0]])

    def test_matrices_hermitian(self):
        for p in enumerate_paulis(2):
            m = p.matrix()
            np.testing.assert_allclose(m, m.conj().T)


class TestExpectation:
    def test_z_on_zero(self):
        assert pauli_expectation(zero_state(1), PauliString.from_label("Z")) == pytest.approx(1)

    def test_x_on_t_state(self, t_state):
        assert pauli_expectation(t_state, PauliString.from_label("X")) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_y_on_t_state(self, t_state):
        assert pauli_expectation(t_state, PauliString.from_label("Y")) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_xx_on_basis(self):
        assert pauli_expectation(zero_state(2), PauliString.from_label("XX")) == 0

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            pauli_expectation(zero_state(2), PauliString.from_label("X"))

    def test_identity_is_one(self, rng):
        for n in range(1, 5):
            assert pauli_expectation(random_state(n, rng), PauliString(n, 0, 0)) == pytest.approx(1, abs=1e-12)

    def test_matches_dense_and_is_real(self, rng):
        s = random_state(3, rng)
        for p in enumerate_paulis(3):
            dense = dense_expectation(s, p)
            assert abs(dense.imag) < 1e-12
            assert pauli_expectation(s, p) == pytest.approx(dense.real, abs=1e-12)


class TestEnumeration:
    def test_single_qubit(self):
        labels = [p.label for p in enumerate_paulis(1)]
        assert sorted(labels) == ["I", "X", "Y", "Z"]
        assert labels[0] == "I"

    def test_two_qubit_distinct(self):
        ps = list(enumerate_paulis(2))
        assert len(ps) == 16 and len(set(ps)) == 16

    def test_three_qubit_deterministic(self):
        first = list(enumerate_paulis(3))
        assert len(first) == 64
        assert first == list(enumerate_paulis(3))

    def test_lexicographic_order(self):
        keys = [(p.x_mask, p.z_mask) for p in enumerate_paulis(2)]
        assert keys == sorted(keys)


class TestSpectrum:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_fast_spectrum_matches_direct_kernel(self, n, rng):
        s = random_state(n, rng)
        spec = pauli_spectrum(s)
        for p in enumerate_paulis(n):
            assert spec[p.x_mask, p.z_mask] == pytest.approx(pauli_expectation(s, p), abs=1e-10)

    def test_small_chunks_agree(self, rng):
        s = random_state(5, rng)
        np.testing.assert_allclose(pauli_spectrum(s, chunk_elems=64), pauli_spectrum(s), atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 7), st.integers(0, 2**32 - 1))
    def test_purity_identity(self, n, seed):
        s = random_state(n, np.random.default_rng(seed))
        assert float(np.sum(pauli_spectrum(s) ** 2)) == pytest.approx(2**n, abs=1e-8)


class TestXiNorm:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_zero_state(self, n):
        assert xi_norm(zero_state(n)) == pytest.approx(1 / 2**n, abs=1e-15)

    def test_t_state(self, t_state):
        assert xi_norm(t_state) == pytest.approx(3 / 8, abs=1e-15)

    def test_rxx_quarter(self):
        assert xi_norm(rxx_state(math.pi / 4)) == pytest.approx(3 / 16, abs=1e-15)

    def test_rxx_quarter_nonzero_expectations(self):
        s = rxx_state(math.pi / 4)
        r = 1 / math.sqrt(2)
        expected = {"II": 1, "ZZ": 1, "ZI": r, "IZ": r, "XY": -r, "YX": -r}
        for p in enumerate_paulis(2):
            assert pauli_expectation(s, p) == pytest.approx(expected.get(p.label, 0.0), abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_identity_with_m2(self, n, rng):
        s = random_state(n, rng)
        assert xi_norm(s) * 2**n == pytest.approx(2 ** -stabilizer_entropy(s, 2), abs=1e-10)

    def test_basis_state_nonzero(self):
        assert 0 < xi_norm(new_basis_state(3, "110")) <= 1
