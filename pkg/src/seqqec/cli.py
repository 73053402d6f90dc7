"""Command-line entry point.

Subcommands::

    seqqec run CONFIG.yaml [--set key.path=value ...]
    seqqec figure {2a,2b,3,4,5} [--set ...]
    seqqec gain --code 513 --p 1e-3 --ng 99
    seqqec opcount --code steane
    seqqec validate [--full]

Configs are YAML. Unknown keys are rejected, and every run writes a CSV
plus a ``.manifest.json`` echoing the fully resolved config. Outputs go
under ``$SEQQEC_OUTPUT_ROOT`` (default ``./results``).

Exit codes: 0 ok, 2 config error, 3 runtime error, 4 validation failure.
"""

from __future__ import annotations

import argparse
import copy
import logging
import os
import sys
import time
from pathlib import Path

import yaml

log = logging.getLogger("seqqec")

OUTPUT_ROOT_ENV = "SEQQEC_OUTPUT_ROOT"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VALIDATE = 0, 2, 3, 4
CODES = ("513", "steane", "surface9")
EXPERIMENTS = ("pseudothreshold", "t2sweep", "gain", "figure4", "validate", "opcount")

DEFAULTS: dict = {
    "experiment": "pseudothreshold",
    "codes": list(CODES),
    "seed": 0,
    "output": None,
    "workers": None,
    "noise": {
        "p_tqg": 1e-3,
        "resting_mode": "none",
        "readout_mode": "symmetric",
        "t2_spin": None,
    },
    "sweep": {
        "values": None,
        "range": {"lo": 1e-4, "hi": 3e-2, "count": 12},
        "n_gs": None,
        "prune_threshold": 0.0,
        "shots": None,
        "physical_gate": "sqg",
        "refine": True,
        "mirror_opposites": True,
    },
    "figure4": {"N": 75, "C": 1.0, "ps": [1e-4, 1e-3, 1e-2], "n_max": 200},
}


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


# --------------------------------------------------------------------- config

def _merge(base: dict, upd: dict, path: str = "") -> None:
    for k, v in upd.items():
        where = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"'{where}' must be a mapping")
            _merge(base[k], v, where + ".")
        else:
            base[k] = v


def apply_override(cfg: dict, item: str) -> None:
    """Apply one ``dotted.key=value`` override; the value is parsed as YAML."""
    if "=" not in item:
        raise ConfigError(f"override '{item}' is not key=value")
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for i, part in enumerate(parts):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key '{'.'.join(parts[:i + 1])}'")
        if i == len(parts) - 1:
            if isinstance(node[part], dict):
                raise ConfigError(f"'{key}' is a section, not a value")
            node[part] = yaml.safe_load(raw)
        else:
            node = node[part]


def validate_config(cfg: dict) -> dict:
    if cfg["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
    codes = cfg["codes"]
    if isinstance(codes, str):
        codes = cfg["codes"] = [codes]
    for c in codes:
        if str(c) not in CODES:
            raise ConfigError(f"codes: unknown code {c!r}")
    cfg["codes"] = [str(c) for c in codes]
    noise = cfg["noise"]
    if noise["resting_mode"] not in ("none", "scaled_by_p_tqg", "from_t2"):
        raise ConfigError(f"noise.resting_mode: unknown value {noise['resting_mode']!r}")
    if noise["readout_mode"] not in ("symmetric", "asymmetric"):
        raise ConfigError(f"noise.readout_mode: unknown value {noise['readout_mode']!r}")
    if (noise["resting_mode"] == "from_t2" and cfg["experiment"] != "t2sweep"
            and not noise["t2_spin"]):
        raise ConfigError("noise.t2_spin is required when noise.resting_mode is from_t2")
    if cfg["experiment"] == "t2sweep" and noise["resting_mode"] != "from_t2":
        raise ConfigError("noise.resting_mode must be from_t2 for a t2sweep")
    sw = cfg["sweep"]
    if sw["shots"] is not None and int(sw["shots"]) <= 0:
        raise ConfigError("sweep.shots must be positive")
    if sw["physical_gate"] not in ("sqg", "tqg"):
        raise ConfigError("sweep.physical_gate must be sqg or tqg")
    if cfg["workers"] is not None and int(cfg["workers"]) < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def load_config(path: str | None, overrides: list[str] = (), base: dict | None = None) -> dict:
    cfg = copy.deepcopy(base or DEFAULTS)
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
        _merge(cfg, data)
    for item in overrides:
        apply_override(cfg, item)
    return validate_config(cfg)


# ------------------------------------------------------------------ execution

def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "results"))


def _sweep_values(cfg: dict) -> tuple[float, ...]:
    from .experiments import log_range

    sw = cfg["sweep"]
    if sw["values"] is not None:
        return tuple(float(v) for v in sw["values"])
    r = sw["range"]
    return log_range(float(r["lo"]), float(r["hi"]), int(r["count"]))


def _spec(cfg: dict, code: str):
    from .experiments import SweepSpec

    variable = {"pseudothreshold": "p_tqg", "t2sweep": "t2_ratio", "gain": "ng_p"}[cfg["experiment"]]
    sw, noise = cfg["sweep"], cfg["noise"]
    try:
        return SweepSpec(
            code=code, variable=variable, values=_sweep_values(cfg),
            n_gs=tuple(sw["n_gs"] or ()), resting_mode=noise["resting_mode"],
            readout_mode=noise["readout_mode"], prune_threshold=float(sw["prune_threshold"]),
            shots=None if sw["shots"] is None else int(sw["shots"]), seed=int(cfg["seed"]),
            p_tqg=float(noise["p_tqg"]),
            t2_spin=None if noise["t2_spin"] is None else float(noise["t2_spin"]),
            physical_gate=sw["physical_gate"], refine=bool(sw["refine"]),
            mirror_opposites=bool(sw["mirror_opposites"]),
            workers=int(cfg["workers"] or os.cpu_count() or 1))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep: {exc}") from exc


def _out_path(cfg: dict, default_name: str) -> Path:
    name = cfg["output"] or default_name
    p = Path(name)
    return p if p.is_absolute() else output_root() / p


def execute(cfg: dict) -> list[Path]:
    """Run a validated config and return the CSV paths written."""
    from .codes import get_code
    from .experiments import run_sweep, write_manifest

    exp = cfg["experiment"]
    if exp == "figure4":
        return [_write_figure4(cfg)]
    if exp == "opcount":
        _print_opcounts(cfg["codes"])
        return []
    if exp == "validate":
        ok = run_validation(full=False)
        if not ok:
            raise ValidationFailed()
        return []
    written = []
    base = _out_path(cfg, exp)
    for code in cfg["codes"]:
        spec = _spec(cfg, code)
        if spec.shots is None and code == "surface9":
            log.info("surface9 runs in exact mode")
        t0 = time.perf_counter()
        res = run_sweep(spec)
        path = res.write_csv(base.with_name(f"{base.name}_{code}.csv"))
        lops = get_code(code)
        extra = {"seconds": time.perf_counter() - t0,
                 "logical_not": {"X_L": lops.logical_x.letters, "Z_L": lops.logical_z.letters}}
        if exp == "pseudothreshold":
            extra["crossing"] = res.crossing
            print(f"{code}: pseudothreshold {res.crossing if res.crossing else 'absent'}")
        if exp == "gain":
            extra["optimal_ng"] = {str(k): v for k, v in res.optimal_ng.items()}
            extra["max_gain"] = {str(k): v for k, v in res.max_gain.items()}
            for p in res.optimal_ng:
                print(f"{code}: p={p:g} max gain {res.max_gain[p]:.3g} at n_g={res.optimal_ng[p]}")
        write_manifest(path.with_suffix(".manifest.json"), {**cfg, "codes": [code]}, extra)
        written.append(path)
        print(path)
    return written


def _write_figure4(cfg: dict) -> Path:
    import csv

    from .analytic import figure4_grid
    from .experiments import write_manifest

    f4 = cfg["figure4"]
    rows = figure4_grid(int(f4["N"]), float(f4["C"]), [float(p) for p in f4["ps"]],
                        range(0, int(f4["n_max"]) + 1))
    path = _out_path(cfg, "figure4").with_suffix(".csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["p", "n_g", "gain", "gain_2nd_order"])
        w.writeheader()
        w.writerows(rows)
    write_manifest(path.with_suffix(".manifest.json"), cfg)
    print(path)
    return path


def _print_opcounts(codes) -> None:
    from .protocols import get_protocol

    for c in codes:
        lo, hi = get_protocol(c).op_count_bounds()
        print(f"{c}: {lo} / {hi}")


class ValidationFailed(RuntimeError):
    pass


def run_validation(full: bool = False) -> bool:
    """Invariant checks with a pass/fail table; ``full`` adds exact-engine fault runs."""
    import numpy as np

    from .codes import BASIS_LABELS, get_code, logical_basis
    from .ft import check_single_faults_exact, check_single_faults_frames
    from .metrics import bloch_average_error
    from .noise import (default_params, depolarizing_1q, depolarizing_2q, noiseless_params,
                        phase_damping)
    from .protocols import get_protocol

    checks = []

    def record(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # reported, not raised: validate prints a table
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append((name, ok, detail))

    def kraus():
        worst = 0.0
        for ch in (depolarizing_1q(0.3), depolarizing_2q(0.3), phase_damping(0.4)):
            s = sum(k.conj().T @ k for k in ch.operators)
            worst = max(worst, float(np.max(np.abs(s - np.eye(s.shape[0])))))
        return worst < 1e-12, f"max deviation {worst:.1e}"

    record("kraus completeness", kraus)

    def codewords():
        for c in CODES:
            code = get_code(c)
            code.validate()
            logical_basis(code)
            if min(code.logical_x.weight, code.logical_z.weight) != 3:
                return False, f"{c} logical weight"
        return True, "generators, logicals, codewords"

    record("codes", codewords)
    expected = {"513": (55, 100), "steane": (96, 276), "surface9": (144, 144)}
    for c in CODES:
        record(f"opcount {c}",
               lambda c=c: ((got := get_protocol(c).op_count_bounds()) == expected[c], f"{got}"))
    for c in CODES:
        def zero(c=c):
            r = bloch_average_error(c, noiseless_params())
            return r["mean"] < 1e-10, f"{r['mean']:.1e}"
        record(f"zero noise {c}", zero)
    for c in CODES:
        def ft(c=c):
            r = check_single_faults_frames(c)
            return r.ok, f"{r.n_faults} faults, {len(r.offenders)} failing"
        record(f"single faults {c} (frames)", ft)
    if full:
        for c in ("513", "steane"):
            def fte(c=c):
                r = check_single_faults_exact(c, BASIS_LABELS)
                return r.ok, f"{r.n_faults} faults, worst {r.worst:.1e}"
            record(f"single faults {c} (exact)", fte)
    _ = default_params
    width = max(len(n) for n, _, _ in checks)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    return all(ok for _, ok, _ in checks)


# ------------------------------------------------------------------- figures

FIGURES = {
    "2a": {"experiment": "pseudothreshold", "noise": {"resting_mode": "scaled_by_p_tqg"},
           "sweep": {"range": {"lo": 1e-4, "hi": 3e-2, "count": 12}}, "output": "figure2a"},
    "2b": {"experiment": "pseudothreshold", "noise": {"resting_mode": "none"},
           "sweep": {"range": {"lo": 1e-4, "hi": 3e-2, "count": 12}}, "output": "figure2b"},
    # T2,spin from 1 ms to 1 h in units of T2,opt = 2.5 ms
    "3": {"experiment": "t2sweep", "noise": {"resting_mode": "from_t2", "p_tqg": 1e-3},
          "sweep": {"range": {"lo": 0.4, "hi": 1.44e6, "count": 14}}, "output": "figure3"},
    "4": {"experiment": "figure4", "output": "figure4"},
    "5": {"experiment": "gain", "noise": {"resting_mode": "none"},
          "sweep": {"values": [1e-4, 1e-3]}, "output": "figure5"},
}


def figure_config(fig: str) -> dict:
    if fig not in FIGURES:
        raise ConfigError(f"unknown figure {fig!r}; choose from {', '.join(FIGURES)}")
    cfg = copy.deepcopy(DEFAULTS)
    _merge(cfg, copy.deepcopy(FIGURES[fig]))
    return cfg


# ----------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqqec", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted-path override, e.g. sweep.shots=100000")
        p.add_argument("--workers", type=int, help="parallel grid points (default: all cores)")
        p.add_argument("--out", help="output name or path (relative to the output root)")

    p = sub.add_parser("run", help="run an experiment from a YAML config")
    p.add_argument("config")
    common(p)
    p = sub.add_parser("figure", help="write the data behind a figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    common(p)
    p = sub.add_parser("gain", help="gain at given p and n_g values")
    p.add_argument("--code", required=True, choices=CODES)
    p.add_argument("--p", type=float, nargs="+", default=[1e-3])
    p.add_argument("--ng", type=int, nargs="+", required=True)
    common(p)
    p = sub.add_parser("opcount", help="best / worst operation counts")
    p.add_argument("--code", choices=CODES, action="append")
    p = sub.add_parser("validate", help="invariant checks with a pass/fail table")
    p.add_argument("--full", action="store_true", help="add exact-engine fault injection")
    return ap


def _apply_common(cfg: dict, args) -> dict:
    for item in args.overrides:
        apply_override(cfg, item)
    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.out:
        cfg["output"] = args.out
    return validate_config(cfg)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "opcount":
            _print_opcounts(args.code or CODES)
            return EXIT_OK
        if args.command == "validate":
            return EXIT_OK if run_validation(full=args.full) else EXIT_VALIDATE
        if args.command == "run":
            cfg = _apply_common(load_config(args.config), args)
        elif args.command == "figure":
            cfg = _apply_common(figure_config(args.figure), args)
        else:
            cfg = copy.deepcopy(DEFAULTS)
            _merge(cfg, {"experiment": "gain", "codes": [args.code], "output": "gain",
                         "sweep": {"values": sorted(args.p), "n_gs": sorted(set(args.ng)),
                                   "refine": False}})
            cfg = _apply_common(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        execute(cfg)
    except ValidationFailed:
        return EXIT_VALIDATE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
