from __future__ import annotations

import csv
import json
import math

import pytest

from seqqec.experiments import (REFERENCE_OPTIMA, STATE_COLUMNS, SweepSpec, default_ng_grid,
                                gain_experiment, log_range, loglog_crossing, physical_error,
                                pseudothreshold_sweep, t2_sweep, write_manifest)


def test_log_range():
    v = log_range(1e-4, 1e-2, 3)
    assert v == pytest.approx((1e-4, 1e-3, 1e-2))
    with pytest.raises(ValueError):
        log_range(0, 1, 3)


def test_default_grid_contains_reference_optima():
    grid = default_ng_grid()
    assert set(REFERENCE_OPTIMA) <= set(grid)
    assert list(grid) == sorted(set(grid))


def test_crossing_interpolates_in_log_space():
    ps = [1e-3, 1e-2]
    eps = [1e-4, 1e-1]
    x = loglog_crossing(ps, eps)
    # log(eps/p) runs from -1 to +1 decade, so the root sits mid-way in log p
    assert x == pytest.approx(math.sqrt(1e-3 * 1e-2))


def test_crossing_absent():
    assert loglog_crossing([1e-3, 1e-2], [1e-2, 1e-1]) is None
    assert loglog_crossing([1e-3, 1e-2], [1e-5, 1e-4]) is None


@pytest.mark.parametrize("kw", [dict(values=(2e-3, 1e-3)), dict(values=()), dict(shots=0),
                                dict(n_gs=(5, 5)), dict(physical_gate="three"), dict(workers=0)])
def test_spec_validation(kw):
    base = dict(code="513", variable="p_tqg", values=(1e-3, 2e-3))
    base.update(kw)
    with pytest.raises(ValueError):
        SweepSpec(**base)


def test_physical_error_closed_form():
    for n in (0, 1, 7, 99):
        p = 1e-3
        assert physical_error(n, p) == pytest.approx((1 - (1 - 4 * p / 3) ** n) / 2, rel=1e-10)


def test_pseudothreshold_sweep_rows_and_csv(tmp_path):
    spec = SweepSpec("513", "p_tqg", (1e-3, 1e-2))
    res = pseudothreshold_sweep(spec)
    assert len(res.rows) == 2
    assert res.crossing is not None and 1e-3 < res.crossing < 1e-2
    path = res.write_csv(tmp_path / "pt.csv")
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0])[:2] == ["code", "p_tqg"]
    assert set(STATE_COLUMNS.values()) <= set(rows[0])
    assert rows[0]["eps_0"] == rows[0]["eps_1"]


def test_parallel_and_serial_agree():
    serial = pseudothreshold_sweep(SweepSpec("513", "p_tqg", (1e-3, 3e-3)))
    par = pseudothreshold_sweep(SweepSpec("513", "p_tqg", (1e-3, 3e-3), workers=2))
    for a, b in zip(serial.rows, par.rows):
        assert a["eps_mean"] == b["eps_mean"]


def test_sampling_mode_adds_std_error():
    res = pseudothreshold_sweep(SweepSpec("513", "p_tqg", (1e-2,), shots=2000, seed=4))
    assert "std_error" in res.header
    assert res.rows[0]["std_error"] > 0


def test_t2_sweep_is_monotone():
    spec = SweepSpec("513", "t2_ratio", (1.0, 100.0, 1e4), resting_mode="from_t2")
    eps = t2_sweep(spec).column("eps_mean")
    assert eps[0] > eps[1] > eps[2]


def test_t2_sweep_requires_t2_mode():
    with pytest.raises(ValueError):
        t2_sweep(SweepSpec("513", "t2_ratio", (1.0,)))


def test_small_gain_grid():
    spec = SweepSpec("513", "ng_p", (1e-3,), n_gs=(10, 50, 99, 200), refine=False)
    res = gain_experiment(spec)
    assert res.optimal_ng[1e-3] == 99
    assert res.max_gain[1e-3] == max(r["gain"] for r in res.rows)
    assert "gain" in res.header and "eps_phys" in res.header


def test_manifest(tmp_path):
    path = write_manifest(tmp_path / "m.json", {"seed": 1}, {"crossing": None})
    doc = json.loads(path.read_text())
    assert doc["config"] == {"seed": 1}
    assert "PCG64" in doc["rng"]
