"""Acceptance criteria 1 to 10.

Each test prints one ``acceptance N: PASS|FAIL`` line and then asserts. The
expensive sweeps are cached per module so criteria sharing a data point do
not recompute it. Everything runs on one worker.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
import pytest

from seqqec.analytic import GainModelParams, argmax_ng, model_gain, optimal_ng
from seqqec.codes import BASIS_LABELS, get_code, logical_basis, perfect_ec
from seqqec.experiments import (SweepSpec, gain_experiment, log_range, pseudothreshold_sweep,
                                t2_sweep)
from seqqec.ft import check_single_faults_exact, check_single_faults_frames
from seqqec.mc import McConfig, mc_logical_error_rate
from seqqec.metrics import bloch_average_error
from seqqec.noise import (default_params, depolarizing_1q, depolarizing_2q, noiseless_params,
                          phase_damping, phase_damping_standard)
from seqqec.paulis import PauliString
from seqqec.protocols import get_protocol

CODES = ("513", "steane", "surface9")
P_REF = 1e-3
CROSSING_GRID = log_range(1e-3, 2e-2, 9)

CROSSING_TARGET = {"513": 4e-3, "surface9": 3e-3}
GAIN_TARGET = {"513": 20.0, "steane": 10.0, "surface9": 20.0}
NG_TARGET = {"513": 99, "steane": 244, "surface9": 140}


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\nacceptance {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


@lru_cache(maxsize=None)
def threshold_sweep(code: str):
    return pseudothreshold_sweep(SweepSpec(code, "p_tqg", CROSSING_GRID))


@lru_cache(maxsize=None)
def eps_without_resting(code: str) -> float:
    res = threshold_sweep(code)
    assert res.rows[0]["p_tqg"] == pytest.approx(P_REF)
    return res.rows[0]["eps_mean"]


@lru_cache(maxsize=None)
def eps_scaled_resting(code: str) -> float:
    spec = SweepSpec(code, "p_tqg", (P_REF,), resting_mode="scaled_by_p_tqg")
    return pseudothreshold_sweep(spec).rows[0]["eps_mean"]


def within_factor(x: float | None, target: float, factor: float) -> bool:
    return x is not None and target / factor <= x <= target * factor


def test_1_operation_counts(report):
    expected = {"513": (55, 100), "steane": (96, 276), "surface9": (144, 144)}
    got = {c: get_protocol(c).op_count_bounds() for c in CODES}
    assert report(1, got == expected, f"best/worst {got}")


def test_2_single_fault_tolerance(report):
    reports = [check_single_faults_exact(c, labels=BASIS_LABELS) for c in ("513", "steane")]
    reports.append(check_single_faults_frames("surface9"))
    detail = ", ".join(f"{r.code}[{r.method}] faults={r.n_faults} worst={r.worst:.1e}"
                       for r in reports)
    assert report(2, all(r.ok for r in reports), detail)


def test_3_zero_noise_identity(report):
    worst = {c: max(bloch_average_error(c, noiseless_params())["per_state"].values())
             for c in CODES}
    ok = all(v < 1e-10 for v in worst.values())
    assert report(3, ok, " ".join(f"{c}={v:.1e}" for c, v in worst.items()))


def test_4_pseudothresholds(report):
    cross = {c: threshold_sweep(c).crossing for c in CODES}
    ok = all(within_factor(cross[c], t, 2.0) for c, t in CROSSING_TARGET.items())
    ok = ok and cross["steane"] is not None
    ok = ok and all(cross["steane"] < cross[c] for c in CROSSING_TARGET if cross[c] is not None)
    detail = " ".join(f"{c}={v:.3g}" if v else f"{c}=none" for c, v in cross.items())
    assert report(4, ok, detail)


def test_5_gain_at_reference_rate(report):
    parts, ok = [], True
    for code in CODES:
        res = gain_experiment(SweepSpec(code, "ng_p", (P_REF,)))
        g, n = res.max_gain[P_REF], res.optimal_ng[P_REF]
        g_ok = within_factor(g, GAIN_TARGET[code], 2.0)
        n_ok = abs(n - NG_TARGET[code]) <= 0.3 * NG_TARGET[code]
        ok = ok and g_ok and n_ok
        parts.append(f"{code} gain={g:.2f}{'' if g_ok else '(out)'} "
                     f"n_g={n}{'' if n_ok else '(out)'}")
    assert report(5, ok, "; ".join(parts))


def test_6_analytic_model(report):
    checks = {"optimal_ng(75)=25": optimal_ng(75) == 25}
    base = model_gain(GainModelParams(75, 1.0, 1e-3, 25))
    checks["gain*p constant"] = all(
        math.isclose(model_gain(GainModelParams(75, 1.0, p, 25)) * p, base * 1e-3, rel_tol=1e-12)
        for p in (1e-5, 1e-4, 1e-2, 0.1))
    argmaxes = {argmax_ng({n: model_gain(GainModelParams(75, C, p, n)) for n in range(76)})
                for p in (1e-5, 1e-3, 1e-1) for C in (0.2, 1.0, 7.0)}
    checks["argmax independent of p, C"] = argmaxes == {25}
    failed = [k for k, v in checks.items() if not v]
    assert report(6, not failed, "failed: " + ", ".join(failed) if failed else ", ".join(checks))


def test_7_t2_plateau(report):
    parts, ok = [], True
    for code in CODES:
        t2 = t2_sweep(SweepSpec(code, "t2_ratio", (1.0, 100.0, 1e4), resting_mode="from_t2",
                                p_tqg=P_REF))
        e1, e100, e1e4 = t2.column("eps_mean")
        none, scaled = eps_without_resting(code), eps_scaled_resting(code)
        r100, r1e4, d1 = abs(e100 / none - 1), abs(e1e4 / none - 1), abs(e1 - scaled)
        c_ok = r100 <= 0.25 and r1e4 <= 0.05 and d1 <= 1e-6
        ok = ok and c_ok
        parts.append(f"{code} ratio100 {r100:.1%} ratio1e4 {r1e4:.2%} "
                     f"|ratio1-scaled|={d1:.2e}")
    assert report(7, ok, "; ".join(parts))


def test_8_ordering_with_resting(report):
    eps = {c: eps_scaled_resting(c) for c in CODES}
    ok = eps["513"] < eps["surface9"] < eps["steane"]
    assert report(8, ok, " ".join(f"{c}={v:.3e}" for c, v in eps.items()))


def test_9_oracle_equivalence(report):
    grid = (1e-3, 2e-3, 4e-3, 7e-3, 1e-2)
    worst, ok = 0.0, True
    for code, (i, p) in itertools.product(("513", "steane"), enumerate(grid)):
        params = default_params(p)
        exact = bloch_average_error(code, params, labels=("0", "+", "+i"))["mean"]
        mc = mc_logical_error_rate(McConfig(100_000, 1000 + i, code, params))
        z = abs(mc.estimate - exact) / mc.std_error
        worst = max(worst, z)
        ok = ok and z <= 3.0
    assert report(9, ok, f"max |mc - exact| = {worst:.2f} standard errors over 10 points")


def test_10_invariants(report):
    rng = np.random.default_rng(10)
    checks = {}
    ps = list(rng.uniform(0, 1, 20)) + [0.0, 1.0]
    checks["kraus completeness"] = all(
        np.allclose(sum(k.conj().T @ k for k in ch.operators), np.eye(ch.operators[0].shape[0]),
                    atol=1e-12)
        for p in ps
        for ch in (depolarizing_1q(p), depolarizing_2q(p), phase_damping(p),
                   phase_damping_standard(p)))
    checks["phase damping forms"] = all(
        np.allclose(phase_damping(g).superoperator(), phase_damping_standard(g).superoperator(),
                    atol=1e-12) for g in ps)
    codes = [get_code(c) for c in CODES]
    checks["generators commute"] = all(a.commutes(b) for code in codes
                                       for a, b in itertools.combinations(code.generators, 2))
    five = get_code("513")
    syn = [five.syndrome(PauliString.single(5, q, c)) for q in range(5) for c in "XYZ"]
    checks["513 weight-1 syndromes unique"] = len(set(syn)) == 15 and all(any(s) for s in syn)
    checks["logical weights 3"] = all(c.logical_x.weight == 3 and c.logical_z.weight == 3
                                      for c in codes)
    idem = True
    for code in codes:
        rho = logical_basis(code)["+"].to_density_matrix()
        rho = rho.apply_pauli(PauliString.single(code.n, 1, "Y")).depolarize([0, 2], 0.3)
        once = perfect_ec(rho, code)
        idem = idem and np.allclose(once.matrix, perfect_ec(once, code).matrix, atol=1e-10)
    checks["perfect_ec idempotent"] = idem
    failed = [k for k, v in checks.items() if not v]
    assert report(10, not failed, "failed: " + ", ".join(failed) if failed else ", ".join(checks))
