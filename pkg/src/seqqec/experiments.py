"""Parameter sweeps: pseudothreshold, spin-T2 and the NOT-gate gain map.

Every sweep returns a :class:`SweepResult` whose rows share one CSV schema::

    code, <x columns>, eps_0, eps_1, eps_plus, eps_minus, eps_plus_i,
    eps_minus_i, eps_mean, pruned_mass, ops_min, ops_max, seconds

Sampling runs add ``std_error``; gain runs add ``eps_phys`` and ``gain``.
Grid points are independent jobs. With ``workers > 1`` they go to a process
pool and come back in grid order, so results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from . import __version__
from .codes import BASIS_LABELS, LABEL_AXIS
from .ec import flip_label
from .noise import T2_OPTICAL, ErrorParams, default_params, depolarizing_1q
from .paulis import PAULI_MATRICES

Variable = Literal["p_tqg", "t2_ratio", "ng_p"]

# optima reported for the three codes; always part of default n_g grids
REFERENCE_OPTIMA = (25, 99, 140, 244)
STATE_COLUMNS = {"0": "eps_0", "1": "eps_1", "+": "eps_plus", "-": "eps_minus",
                 "+i": "eps_plus_i", "-i": "eps_minus_i"}
# one state per Bloch axis; its opposite fails on exactly the same histories
AXIS_LABELS = ("0", "+", "+i")


def log_range(lo: float, hi: float, count: int) -> tuple[float, ...]:
    """``count`` log-spaced values from ``lo`` to ``hi`` inclusive."""
    if count < 1 or lo <= 0 or hi < lo:
        raise ValueError("need 0 < lo <= hi and count >= 1")
    return tuple(float(v) for v in np.geomspace(lo, hi, count))


def default_ng_grid(hi: int = 1000, count: int = 30) -> tuple[int, ...]:
    """Geometric ``n_g`` grid from 1 to ``hi`` that contains the reference optima."""
    geo = np.unique(np.round(np.geomspace(1, hi, count)).astype(int))
    return tuple(sorted(set(geo.tolist()) | {n for n in REFERENCE_OPTIMA if n <= hi}))


@dataclass(frozen=True)
class SweepSpec:
    """One sweep over a code.

    ``values`` holds the swept ``p_tqg`` (pseudothreshold and gain) or
    ``T2,spin / T2,opt`` ratios (t2 sweep). ``shots`` switches on sampling
    with the Monte-Carlo oracle.
    """

    code: str
    variable: Variable
    values: tuple[float, ...]
    n_gs: tuple[int, ...] = ()
    resting_mode: str = "none"
    readout_mode: str = "symmetric"
    prune_threshold: float = 0.0
    shots: int | None = None
    seed: int = 0
    p_tqg: float = 1e-3
    t2_spin: float | None = None
    physical_gate: Literal["sqg", "tqg"] = "sqg"
    refine: bool = True
    mirror_opposites: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "n_gs", tuple(int(n) for n in self.n_gs))
        if not self.values:
            raise ValueError("values must not be empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if any(b <= a for a, b in zip(self.n_gs, self.n_gs[1:])):
            raise ValueError("n_gs must be strictly increasing")
        if any(n < 0 for n in self.n_gs):
            raise ValueError("n_gs must be non-negative")
        if self.shots is not None and self.shots <= 0:
            raise ValueError("shots must be positive when sampling is on")
        if self.physical_gate not in ("sqg", "tqg"):
            raise ValueError("physical_gate must be sqg or tqg")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def params_at(self, p_tqg: float, t2_ratio: float | None = None) -> ErrorParams:
        extra = {}
        if t2_ratio is not None:
            extra["t2_spin"] = t2_ratio * T2_OPTICAL
        elif self.t2_spin is not None:
            extra["t2_spin"] = self.t2_spin
        return default_params(p_tqg, resting_mode=self.resting_mode,
                              readout_mode=self.readout_mode, **extra)

    @property
    def labels(self) -> tuple[str, ...]:
        return AXIS_LABELS if self.mirror_opposites else BASIS_LABELS


@dataclass
class SweepResult:
    code: str
    x_columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    crossing: float | None = None
    optimal_ng: dict[float, int] = field(default_factory=dict)
    max_gain: dict[float, float] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    @property
    def header(self) -> list[str]:
        cols = ["code", *self.x_columns, *STATE_COLUMNS.values(), "eps_mean",
                "pruned_mass", "ops_min", "ops_max", "seconds"]
        extra = [k for k in ("std_error", "eps_phys", "gain") if self.rows and k in self.rows[0]]
        return cols + extra

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=self.header, extrasaction="ignore")
            w.writeheader()
            for r in self.rows:
                w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in self.header})
        return path


def write_manifest(path: str | Path, config: dict, extra: dict | None = None) -> Path:
    """JSON manifest echoing the resolved config plus environment details."""
    from .mc import RNG_ALGORITHM

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"config": config, "package_version": __version__,
           "python": sys.version.split()[0], "numpy": np.__version__,
           "platform": platform.platform(), "rng": RNG_ALGORITHM}
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return path


def spec_to_dict(spec: SweepSpec) -> dict:
    return asdict(spec)


# ---------------------------------------------------------------- grid points

def _mirror(per: dict) -> dict:
    out = dict(per)
    for lab in list(per):
        out.setdefault(flip_label(lab), per[lab])
    return out


def _row(code: str, xs: dict, per: dict, pruned: float, omin, omax, seconds: float) -> dict:
    per = _mirror(per)
    row = {"code": code, **xs}
    for lab in BASIS_LABELS:
        row[STATE_COLUMNS[lab]] = float(per[lab])
    row["eps_mean"] = float(np.mean([per[lab] for lab in BASIS_LABELS]))
    row.update(pruned_mass=pruned, ops_min=omin, ops_max=omax, seconds=seconds)
    return row


def _evaluate_point(job: tuple) -> dict:
    spec, xs, params, n_g = job
    t0 = time.perf_counter()
    if spec.shots is not None:
        from .mc import McConfig, mc_logical_error_rate

        res = mc_logical_error_rate(McConfig(spec.shots, spec.seed, spec.code, params), n_g)
        per = {lab: res.per_axis[LABEL_AXIS[lab][0]][0] for lab in BASIS_LABELS}
        row = _row(spec.code, xs, per, 0.0, None, None, time.perf_counter() - t0)
        row["std_error"] = res.std_error
        return row
    from .metrics import bloch_average_error

    r = bloch_average_error(spec.code, params, n_g, labels=spec.labels,
                            prune_threshold=spec.prune_threshold)
    return _row(spec.code, xs, r["per_state"], r["pruned_mass"], r["ops_min"], r["ops_max"],
                time.perf_counter() - t0)


def _run_jobs(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


# ------------------------------------------------------------ pseudothreshold

def loglog_crossing(ps: Sequence[float], eps: Sequence[float]) -> float | None:
    """First ``p`` with ``eps(p) = p``, interpolating linearly in log-log.

    Returns ``None`` when ``eps - p`` never changes sign from negative to
    non-negative on the grid.
    """
    ps = np.asarray(ps, dtype=float)
    eps = np.asarray(eps, dtype=float)
    d = eps - ps
    for i in range(len(ps) - 1):
        if d[i] < 0 <= d[i + 1]:
            if eps[i] <= 0:
                return float(ps[i] + (ps[i + 1] - ps[i]) * (-d[i]) / (d[i + 1] - d[i]))
            a0 = math.log(eps[i]) - math.log(ps[i])
            a1 = math.log(eps[i + 1]) - math.log(ps[i + 1])
            t = a0 / (a0 - a1)
            return float(math.exp(math.log(ps[i]) + t * (math.log(ps[i + 1]) - math.log(ps[i]))))
    return None


def pseudothreshold_sweep(spec: SweepSpec) -> SweepResult:
    """Six-state logical error after one EC round at each ``p_tqg``."""
    if spec.variable != "p_tqg":
        raise ValueError("pseudothreshold_sweep needs variable = p_tqg")
    jobs = [(spec, {"p_tqg": p}, spec.params_at(p), 0) for p in spec.values]
    rows = _run_jobs(_evaluate_point, jobs, spec.workers)
    res = SweepResult(spec.code, ("p_tqg",), rows)
    res.crossing = loglog_crossing(spec.values, res.column("eps_mean"))
    return res


# ------------------------------------------------------------------- T2 sweep

def t2_sweep(spec: SweepSpec) -> SweepResult:
    """Logical error against ``T2,spin / T2,opt`` at fixed ``p_tqg``."""
    if spec.variable != "t2_ratio":
        raise ValueError("t2_sweep needs variable = t2_ratio")
    if spec.resting_mode != "from_t2":
        raise ValueError("t2_sweep needs resting_mode = from_t2")
    jobs = [(spec, {"t2_ratio": r, "t2_spin": r * T2_OPTICAL, "p_tqg": spec.p_tqg},
             spec.params_at(spec.p_tqg, r), 0) for r in spec.values]
    return SweepResult(spec.code, ("t2_ratio", "t2_spin", "p_tqg"),
                       _run_jobs(_evaluate_point, jobs, spec.workers))


# ----------------------------------------------------------------------- gain

def physical_error(n_g: int, p_gate: float) -> float:
    """Infidelity after ``n_g`` noisy Pauli NOTs on one qubit, six-state mean.

    Each state gets the NOT that flips it (``X`` on Z- and Y-axis states,
    ``Z`` on X-axis states) followed by single-qubit depolarizing noise.
    """
    chan = depolarizing_1q(p_gate)
    vecs = {"0": [1, 0], "1": [0, 1], "+": [1, 1], "-": [1, -1], "+i": [1, 1j], "-i": [1, -1j]}
    out = []
    for lab in BASIS_LABELS:
        v = np.array(vecs[lab], dtype=complex)
        v /= np.linalg.norm(v)
        rho = np.outer(v, v.conj())
        gate = PAULI_MATRICES["Z" if LABEL_AXIS[lab][0] == "X" else "X"]
        ideal = v.copy()
        for _ in range(n_g):
            rho = chan.apply(gate @ rho @ gate.conj().T)
            ideal = gate @ ideal
        out.append(1.0 - float(np.real(ideal.conj() @ rho @ ideal)))
    return float(np.mean(out))


def _gain_block(job: tuple) -> list[dict]:
    spec, p, n_gs = job
    params = spec.params_at(p)
    p_gate = params.p_sqg if spec.physical_gate == "sqg" else params.p_tqg
    t0 = time.perf_counter()
    if spec.shots is not None:
        rows = [_evaluate_point((spec, {"p_tqg": p, "n_g": n}, params, n)) for n in n_gs]
    else:
        from .metrics import bloch_average_error_grid

        grid = bloch_average_error_grid(spec.code, params, n_gs, labels=spec.labels,
                                        prune_threshold=spec.prune_threshold)
        each = (time.perf_counter() - t0) / max(len(n_gs), 1)
        rows = [_row(spec.code, {"p_tqg": p, "n_g": g["n_g"]}, g["per_state"], g["pruned_mass"],
                     g["ops_min"], g["ops_max"], each) for g in grid]
    for r in rows:
        r["eps_phys"] = physical_error(r["n_g"], p_gate)
        r["gain"] = r["eps_phys"] / r["eps_mean"] if r["eps_mean"] > 0 else math.inf
    return rows


def _refined(n_gs: Sequence[int], best: int, width: float = 0.3, points: int = 24) -> list[int]:
    lo, hi = max(1, math.floor(best * (1 - width))), math.ceil(best * (1 + width))
    cand = np.unique(np.round(np.linspace(lo, hi, points)).astype(int))
    return sorted(set(cand.tolist()) - set(n_gs))


def gain_experiment(spec: SweepSpec) -> SweepResult:
    """Gain ``eps_phys / eps_L`` over an ``(n_g, p_tqg)`` grid.

    With ``refine`` a second pass fills a +-30% window around each coarse
    argmax before the optimum is read off.
    """
    if spec.variable != "ng_p":
        raise ValueError("gain_experiment needs variable = ng_p")
    n_gs = list(spec.n_gs or default_ng_grid())
    blocks = _run_jobs(_gain_block, [(spec, p, n_gs) for p in spec.values], spec.workers)
    if spec.refine:
        extra = []
        for p, rows in zip(spec.values, blocks):
            best = max(rows, key=lambda r: r["gain"])["n_g"]
            extra.append((spec, p, _refined(n_gs, best)))
        more = _run_jobs(_gain_block, [j for j in extra if j[2]], spec.workers)
        it = iter(more)
        for i, j in enumerate(extra):
            if j[2]:
                blocks[i] = sorted(blocks[i] + next(it), key=lambda r: r["n_g"])
    res = SweepResult(spec.code, ("p_tqg", "n_g"), [r for b in blocks for r in b])
    for p, rows in zip(spec.values, blocks):
        best = max(rows, key=lambda r: (r["gain"], -r["n_g"]))
        res.optimal_ng[p] = int(best["n_g"])
        res.max_gain[p] = float(best["gain"])
    return res


def run_sweep(spec: SweepSpec) -> SweepResult:
    return {"p_tqg": pseudothreshold_sweep, "t2_ratio": t2_sweep,
            "ng_p": gain_experiment}[spec.variable](spec)
