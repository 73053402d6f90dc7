"""Monte-Carlo oracle: sampled Pauli faults propagated as frames.

Each shot samples one Pauli error per noisy op from the channel's
probability table (depolarizing terms, the ``Z`` branch of phase damping,
initialization and declaration flips), runs the adaptive protocol on the
sampled readout bits and scores the final data frame with a noiseless
lookup-table correction. Nothing here touches the exact branch engines.

Shots are split into fixed-size chunks, each with its own PCG64 stream
seeded by ``(seed, axis, chunk)``, so results do not depend on how chunks
are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codes import BASIS_LABELS, LABEL_AXIS, StabilizerCode
from .ec import logical_not_ops
from .frames import drive, run_ops
from .noise import ErrorParams
from .protocols import get_protocol

RNG_ALGORITHM = "PCG64 via numpy SeedSequence(seed, axis, chunk)"
AXES = ("Z", "X", "Y")


@dataclass(frozen=True)
class McConfig:
    shots: int
    seed: int
    code: str
    params: ErrorParams
    chunk_size: int = 20_000

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")


@dataclass
class McResult:
    estimate: float
    std_error: float
    per_axis: dict[str, tuple[float, float]] = field(default_factory=dict)
    shots: int = 0

    @property
    def per_state(self) -> dict[str, float]:
        return {lab: self.per_axis[LABEL_AXIS[lab][0]][0] for lab in BASIS_LABELS}


def _lookup_arrays(code: StabilizerCode):
    m = code.n_generators
    gx = np.array([g.x for g in code.generators], dtype=np.int64)
    gz = np.array([g.z for g in code.generators], dtype=np.int64)
    cx = np.zeros((2 ** m, code.n), dtype=bool)
    cz = np.zeros((2 ** m, code.n), dtype=bool)
    for idx, s in enumerate(np.ndindex(*(2,) * m)):
        c = code.correction(s)
        cx[idx], cz[idx] = c.x.astype(bool), c.z.astype(bool)
    return gx, gz, cx, cz


def logical_failures(code: StabilizerCode, ex: np.ndarray, ez: np.ndarray, axis: str) -> np.ndarray:
    """Whether perfect correction of the data frames leaves a flip of ``axis``."""
    gx, gz, cx, cz = _lookup_arrays(code)
    m = code.n_generators
    ex = ex.astype(np.int64)
    ez = ez.astype(np.int64)
    syn = (ex @ gz.T + ez @ gx.T) & 1
    idx = syn @ (1 << np.arange(m - 1, -1, -1))
    rx = ex ^ cx[idx]
    rz = ez ^ cz[idx]
    lop = code.logical(axis)
    return ((rx @ lop.z.astype(np.int64) + rz @ lop.x.astype(np.int64)) & 1).astype(bool)


def _axis_failures(cfg: McConfig, axis: str, n_g: int) -> tuple[int, int]:
    protocol = get_protocol(cfg.code)
    code = protocol.code
    label = {"Z": "0", "X": "+", "Y": "+i"}[axis]
    prefix = logical_not_ops(code, label, n_g, noisy=True)
    data = frozenset(range(protocol.n_data))
    fails = 0
    done = 0
    n_chunks = math.ceil(cfg.shots / cfg.chunk_size)
    for chunk in range(n_chunks):
        s = min(cfg.chunk_size, cfg.shots - done)
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([cfg.seed, AXES.index(axis), chunk])))
        X = np.zeros((s, protocol.n_qubits), dtype=bool)
        Z = np.zeros((s, protocol.n_qubits), dtype=bool)
        if prefix:
            run_ops(prefix, X, Z, cfg.params, data, rng)
        drive(protocol, X, Z, cfg.params, rng, active=data)
        nd = protocol.n_data
        fails += int(logical_failures(code, X[:, :nd], Z[:, :nd], axis).sum())
        done += s
    return fails, done


def mc_logical_error_rate(cfg: McConfig, n_g: int = 0) -> McResult:
    """Six-state mean logical error with its binomial standard error.

    Opposite states on an axis fail on exactly the same frames, so one shot
    set per axis covers both.
    """
    per = {}
    var = 0.0
    for axis in AXES:
        f, n = _axis_failures(cfg, axis, n_g)
        est = f / n
        se = math.sqrt(est * (1 - est) / n)
        per[axis] = (est, se)
        var += se * se
    mean = sum(v[0] for v in per.values()) / 3
    return McResult(mean, math.sqrt(var) / 3, per, cfg.shots)
