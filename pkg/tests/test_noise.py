from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqqec.noise import (T2_OPTICAL, ErrorParams, default_params, depolarizing_1q,
                          depolarizing_2q, dephasing_z_probability, gamma_from_t2, phase_damping,
                          phase_damping_standard, readout_weights, resting_gamma)
from seqqec.state import basis_state

probs = st.floats(0, 1)


@given(probs)
def test_kraus_completeness(p):
    for ch in (depolarizing_1q(p), depolarizing_2q(p), phase_damping(p), phase_damping_standard(p)):
        s = sum(k.conj().T @ k for k in ch.operators)
        assert np.allclose(s, np.eye(s.shape[0]), atol=1e-12)


@given(probs)
def test_phase_damping_forms_agree(gamma):
    a, b = phase_damping(gamma), phase_damping_standard(gamma)
    assert np.allclose(a.superoperator(), b.superoperator(), atol=1e-12)


def test_phase_damping_shrinks_coherence_by_sqrt():
    gamma = 0.36
    rho = basis_state(1, "0").gate("H", [0]).matrix
    out = phase_damping(gamma).apply(rho)
    assert out[0, 1] == pytest.approx(0.5 * math.sqrt(1 - gamma))
    assert dephasing_z_probability(gamma) == pytest.approx((1 - math.sqrt(1 - gamma)) / 2)


def test_t2_conversion():
    assert gamma_from_t2(0.0, 1.0) == 0.0
    assert gamma_from_t2(1e-5, math.inf) == 0.0
    t, t2 = 1e-4, 2.5e-3
    assert gamma_from_t2(t, t2) == pytest.approx(1 - math.exp(-t / (2 * t2)))
    with pytest.raises(ValueError):
        gamma_from_t2(1.0, 0.0)


def test_resting_modes():
    none = default_params(1e-3)
    assert resting_gamma("tqg", none) == 0.0
    scaled = default_params(1e-3, resting_mode="scaled_by_p_tqg")
    assert resting_gamma("readout", scaled) > resting_gamma("tqg", scaled) > resting_gamma("sqg", scaled)
    t2 = default_params(1e-3, resting_mode="from_t2", t2_spin=100 * T2_OPTICAL)
    assert resting_gamma("readout", t2) == pytest.approx(gamma_from_t2(1e-4, 100 * T2_OPTICAL))


def test_readout_weights():
    assert readout_weights(0.1, "symmetric") == ((0.9, 0.1), (0.1, 0.9))
    (a, b), (c, d) = readout_weights(0.1, "asymmetric")
    assert (a, c) == (1.0, 0.0)  # a declared -1 is always right
    assert b + d == pytest.approx(1.0)


def test_default_params_ratios():
    p = default_params(3e-3)
    assert p.p_sqg == pytest.approx(3e-4)
    assert p.p_init == pytest.approx(2e-4)
    assert p.p_ro == pytest.approx(2e-4)


@pytest.mark.parametrize("kw", [dict(p_tqg=-0.1), dict(p_tqg=1.5), dict(readout_mode="odd"),
                                dict(resting_mode="from_t2"), dict(resting_mode="sometimes")])
def test_params_validation(kw):
    base = dict(p_tqg=1e-3, p_sqg=1e-4, p_init=1e-4, p_ro=1e-4)
    base.update(kw)
    with pytest.raises(ValueError):
        ErrorParams(**base)


def test_depolarizing_2q_is_uniform_over_nonidentity_paulis():
    ch = depolarizing_2q(0.15)
    weights = sorted(np.real(np.trace(k.conj().T @ k)) / 4 for k in ch.operators)
    assert weights[-1] == pytest.approx(0.85)
    assert np.allclose(weights[:-1], 0.01)
