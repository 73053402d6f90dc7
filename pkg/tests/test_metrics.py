from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqqec.codes import BASIS_LABELS, get_code, logical_basis, perfect_ec
from seqqec.metrics import (bloch_average_error, bloch_average_error_grid, logical_error_bounds,
                            reduced_logical_dm)
from seqqec.noise import default_params
from seqqec.paulis import PauliString


@pytest.mark.parametrize("label", BASIS_LABELS)
def test_reduced_dm_of_ideal_state_is_pure(label):
    code = get_code("steane")
    rho = logical_basis(code)[label].to_density_matrix()
    red = reduced_logical_dm(rho, code)
    assert red.fidelity(label) == pytest.approx(1)
    assert np.trace(red.matrix).real == pytest.approx(1)


def test_reduced_dm_requires_codespace():
    code = get_code("513")
    rho = logical_basis(code)["0"].to_density_matrix().apply_pauli(PauliString("XIIII"))
    with pytest.raises(ValueError):
        reduced_logical_dm(rho, code)


@given(st.floats(0, 1))
def test_logical_flip_error_matches_mixing(q):
    code = get_code("513")
    rho = logical_basis(code)["0"].to_density_matrix()
    mixed = rho.scale(1 - q).add(rho.apply_pauli(code.logical_x).scale(q))
    est = logical_error_bounds([perfect_ec(mixed, code)], "0", code)
    assert est.upper == pytest.approx(q, abs=1e-10)


def test_pruned_mass_counts_as_error():
    code = get_code("513")
    rho = logical_basis(code)["+"].to_density_matrix().scale(0.9)
    est = logical_error_bounds([rho], "+", code, pruned_mass=0.1)
    assert est.lower == pytest.approx(0)
    assert est.upper == pytest.approx(0.1)


@pytest.mark.parametrize("name", ["513", "steane"])
def test_batched_grid_matches_single_runs(name):
    params = default_params(2e-3)
    n_gs = [0, 1, 4, 9]
    grid = bloch_average_error_grid(name, params, n_gs, labels=("1", "-", "+i"))
    for row in grid:
        single = bloch_average_error(name, params, row["n_g"], labels=("1", "-", "+i"))
        for lab in ("1", "-", "+i"):
            assert row["per_state"][lab] == pytest.approx(single["per_state"][lab], rel=1e-9, abs=1e-15)


def test_error_grows_with_not_count():
    grid = bloch_average_error_grid("513", default_params(1e-3), [0, 20, 80], labels=("0",))
    means = [r["mean"] for r in grid]
    assert means[0] < means[1] < means[2]
