from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqqec.paulis import PauliString
from seqqec.state import (DensityMatrix, StateVector, basis_state, embed_operator, expectation,
                          fidelity_with_pure, partial_trace)


def test_qubit_zero_is_most_significant():
    rho = basis_state(3, "100")
    assert rho.matrix[4, 4] == 1
    assert expectation(rho, PauliString("ZII")) == pytest.approx(-1)
    assert expectation(rho, PauliString("IZI")) == pytest.approx(1)


def test_embed_matches_kron():
    x = np.array([[0, 1], [1, 0]])
    full = embed_operator(x, [1], 3).toarray()
    assert np.allclose(full, np.kron(np.kron(np.eye(2), x), np.eye(2)))


def test_matrix_is_read_only():
    rho = basis_state(1, "0")
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 2


def test_measure_splits_trace():
    rho = basis_state(1, "0").gate("H", [0])
    plus, minus = rho.measure(0)
    assert plus.trace == pytest.approx(0.5)
    assert minus.trace == pytest.approx(0.5)
    assert plus.add(minus).trace == pytest.approx(1)


def test_reset_with_init_error():
    rho = basis_state(2, "11").reset(0, 0.1)
    assert expectation(rho, PauliString("ZI")) == pytest.approx(0.8)
    assert expectation(rho, PauliString("IZ")) == pytest.approx(-1)


def test_cnot_truth_table():
    out = basis_state(2, "10").gate("CNOT", [0, 1])
    assert np.isclose(out.matrix[3, 3], 1)


def test_partial_trace_of_bell_pair_is_mixed():
    bell = basis_state(2, "00").gate("H", [0]).gate("CNOT", [0, 1])
    red = partial_trace(bell, [0])
    assert np.allclose(red.matrix, np.eye(2) / 2)


def test_depolarize_shrinks_bloch_vector():
    rho = basis_state(1, "0").depolarize([0], 0.3)
    assert expectation(rho, PauliString("Z")) == pytest.approx(1 - 4 * 0.3 / 3)


def test_fidelity_with_pure():
    psi = StateVector(1, np.array([1, 1]) / np.sqrt(2))
    assert fidelity_with_pure(basis_state(1, "0"), psi) == pytest.approx(0.5)


def test_bad_shape_rejected():
    with pytest.raises(ValueError):
        DensityMatrix(2, np.eye(2))


@given(st.text(alphabet="IXYZ", min_size=3, max_size=3), st.floats(0, 1))
def test_pauli_conjugation_preserves_trace(letters, p):
    rho = basis_state(3, "010").gate("H", [0]).depolarize([1, 2], p)
    out = rho.apply_pauli(PauliString(letters))
    assert out.trace == pytest.approx(rho.trace)
    out.check_invariants(psd=True)
