from __future__ import annotations

import numpy as np
import pytest

from seqqec.codes import get_code
from seqqec.mc import McConfig, logical_failures, mc_logical_error_rate
from seqqec.metrics import bloch_average_error
from seqqec.noise import default_params, noiseless_params


def test_zero_noise_gives_zero():
    for code in ("513", "steane", "surface9"):
        res = mc_logical_error_rate(McConfig(500, 3, code, noiseless_params()))
        assert (res.estimate, res.std_error) == (0.0, 0.0)


def test_replay_is_identical():
    cfg = McConfig(4000, 11, "513", default_params(5e-3))
    assert mc_logical_error_rate(cfg) == mc_logical_error_rate(cfg)


def test_chunking_is_fixed_by_config():
    a = mc_logical_error_rate(McConfig(3000, 5, "513", default_params(5e-3), chunk_size=1000))
    b = mc_logical_error_rate(McConfig(3000, 5, "513", default_params(5e-3), chunk_size=1000))
    assert a.per_axis == b.per_axis


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(0, 1, "513", default_params(1e-3))


def test_logical_failures_of_single_errors():
    code = get_code("steane")
    ex = np.zeros((2, 7), dtype=bool)
    ez = np.zeros((2, 7), dtype=bool)
    ex[0, 3] = True
    ex[1, :] = code.logical_x.x.astype(bool)
    assert list(logical_failures(code, ex, ez, "Z")) == [False, True]
    assert list(logical_failures(code, ex, ez, "X")) == [False, False]


def test_agrees_with_exact_engine_at_high_noise():
    params = default_params(1e-2)
    exact = bloch_average_error("513", params, labels=("0", "+", "+i"))["mean"]
    res = mc_logical_error_rate(McConfig(20000, 2, "513", params))
    assert abs(res.estimate - exact) <= 3 * res.std_error


def test_not_prefix_adds_error():
    params = default_params(1e-2)
    base = mc_logical_error_rate(McConfig(20000, 1, "513", params)).estimate
    more = mc_logical_error_rate(McConfig(20000, 1, "513", params), n_g=30).estimate
    assert more > base
