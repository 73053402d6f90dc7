from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqqec.analytic import (GainModelParams, argmax_ng, figure4_grid, implied_c, model_gain,
                             model_gain_2nd_order, optimal_ng, physical_error_2nd_order,
                             resting_budget, scaled_t2_ratio, weight_two_error_rate)


def test_model_gain_example():
    g = model_gain(GainModelParams(75, 1.0, 1e-4, 25))
    assert g == pytest.approx(1e4 * 25 / (150 * 149))
    assert g == pytest.approx(11.186, abs=1e-3)


def test_zero_gates_zero_gain():
    assert model_gain(GainModelParams(75, 1.0, 1e-3, 0)) == 0
    assert model_gain_2nd_order(GainModelParams(75, 1.0, 1e-3, 0)) == 0


@given(st.integers(2, 500), st.floats(0.1, 10), st.floats(1e-6, 0.5), st.integers(1, 300))
def test_gain_scales_as_inverse_p(N, C, p, n):
    a = model_gain(GainModelParams(N, C, p, n))
    b = model_gain(GainModelParams(N, C, p / 10, n))
    assert b == pytest.approx(10 * a, rel=1e-12)


@pytest.mark.parametrize("N,expected", [(75, 25), (3, 1), (300, 100)])
def test_optimal_ng_examples(N, expected):
    assert optimal_ng(N) == expected


@given(st.integers(2, 400))
def test_optimal_ng_is_grid_argmax(N):
    vals = {n: model_gain(GainModelParams(N, 1.0, 1e-3, n)) for n in range(0, N + 2)}
    assert optimal_ng(N) == argmax_ng(vals)


@given(st.floats(1e-5, 0.1), st.floats(0.1, 100))
def test_argmax_independent_of_p_and_c(p, C):
    vals = {n: model_gain(GainModelParams(75, C, p, n)) for n in range(0, 80)}
    assert argmax_ng(vals) == 25


def test_optimum_approaches_a_third():
    assert optimal_ng(30000) / 30000 == pytest.approx(1 / 3, rel=1e-3)


def test_gain_is_concave_up_to_two_thirds_n():
    # d2/dn2 of n/(N+3n)^2 is proportional to 18n - 12N
    N = 300
    g = np.array([model_gain(GainModelParams(N, 1.0, 1e-3, n)) for n in range(0, N)])
    d2 = np.diff(g, 2)
    assert np.all(d2[: 2 * N // 3 - 2] <= 0)
    assert np.all(d2[2 * N // 3 + 2:] > 0)


def test_optimal_ng_rejects_tiny_n():
    with pytest.raises(ValueError):
        optimal_ng(1)


def test_second_order_limits():
    prm = GainModelParams(75, 1.0, 1e-7, 10)
    assert model_gain_2nd_order(prm) == pytest.approx(model_gain(prm), rel=1e-5)
    small = GainModelParams(75, 1.0, 1e-4, 20)
    assert model_gain_2nd_order(small) == pytest.approx(model_gain(small), rel=1e-2)
    assert physical_error_2nd_order(0.01, 3) == pytest.approx(1 - 0.99 ** 3, abs=1e-6)


def test_second_order_optimum_moves_to_fewer_gates():
    # the p^2 correction subtracts from the numerator, which penalizes long circuits
    p = 2e-2
    first = {n: model_gain(GainModelParams(75, 1.0, p, n)) for n in range(0, 120)}
    second = {n: model_gain_2nd_order(GainModelParams(75, 1.0, p, n)) for n in range(0, 120)}
    assert argmax_ng(second) < argmax_ng(first) == 25


def test_weight_two_rate():
    assert weight_two_error_rate(2, 0.1) == pytest.approx(0.01)
    assert weight_two_error_rate(75, 1e-3) == pytest.approx(2.775e-3)


def test_resting_budget():
    single, negligible = resting_budget(10, 1e-3 / 90, 1e-3)
    assert single == pytest.approx(1e-4)
    assert negligible
    assert not resting_budget(10, 1.01e-3 / 90, 1e-3)[1]
    assert resting_budget(10, 0.0, 1e-3) == (0.0, True)


def test_distance_eleven_t2_requirement():
    ratio = scaled_t2_ratio(121, 13, 100)
    assert ratio * 2.5e-3 == pytest.approx(2.5, rel=0.2)


def test_implied_c_inverts_the_model():
    N, n, p, C = 75, 25, 1e-3, 3.0
    g = model_gain(GainModelParams(N, C, p, n))
    eps_phys = p * n
    assert implied_c(eps_phys, eps_phys / g, N, n, p) == pytest.approx(C)


def test_figure4_grid_rows():
    rows = figure4_grid(ps=(1e-3,), n_gs=range(0, 5))
    assert [r["n_g"] for r in rows] == list(range(5))
    assert all(set(r) == {"p", "n_g", "gain", "gain_2nd_order"} for r in rows)


@pytest.mark.parametrize("bad", [dict(N=0), dict(C=0), dict(p=0), dict(p=1), dict(n_g=-1)])
def test_params_validation(bad):
    kw = dict(N=75, C=1.0, p=1e-3, n_g=1)
    kw.update(bad)
    with pytest.raises(ValueError):
        GainModelParams(**kw)
