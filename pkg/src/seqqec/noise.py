"""Error processes: depolarizing gates, phase-damping rest, init and readout."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .paulis import PAULI_MATRICES
from .state import DensityMatrix

ReadoutMode = Literal["symmetric", "asymmetric"]
RestingMode = Literal["none", "scaled_by_p_tqg", "from_t2"]
OpKind = Literal["sqg", "tqg", "readout", "init"]

DEFAULT_DURATIONS = {"sqg": 5e-6, "tqg": 1e-5, "readout": 1e-4, "init": 1e-5}
T2_OPTICAL = 2.5e-3

# resting gamma as a multiple of p_tqg in the scaled model
_SCALED_REST = {"sqg": 1.0, "tqg": 2.0, "readout": 20.0, "init": 2.0}


def _check_prob(name: str, p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    arity: int
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        dim = 2 ** self.arity
        if any(k.shape != (dim, dim) for k in ops):
            raise ValueError("Kraus operator dimension does not match arity")
        object.__setattr__(self, "operators", ops)
        if self.completeness_error() > 1e-10:
            raise ValueError("Kraus operators are not complete")

    def completeness_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(2 ** self.arity))))

    def superoperator(self) -> np.ndarray:
        """Matrix acting on row-major ``vec(rho)``."""
        return sum(np.kron(k, k.conj()) for k in self.operators)

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        return sum(k @ matrix @ k.conj().T for k in self.operators)


@dataclass(frozen=True)
class ErrorParams:
    """Physical error model parameters.

    ``resting_mode`` selects how idle qubits dephase: not at all, with a
    coefficient proportional to ``p_tqg`` or from the spin coherence time.
    """

    p_tqg: float
    p_sqg: float
    p_init: float
    p_ro: float
    readout_mode: ReadoutMode = "symmetric"
    resting_mode: RestingMode = "none"
    t2_spin: float | None = None
    t2_opt: float = T2_OPTICAL
    durations: dict = field(default_factory=lambda: dict(DEFAULT_DURATIONS))
    retired_ancillas_rest: bool = False

    def __post_init__(self):
        for name in ("p_tqg", "p_sqg", "p_init", "p_ro"):
            _check_prob(name, getattr(self, name))
        if self.readout_mode not in ("symmetric", "asymmetric"):
            raise ValueError(f"readout_mode must be symmetric or asymmetric, got {self.readout_mode!r}")
        if self.resting_mode not in ("none", "scaled_by_p_tqg", "from_t2"):
            raise ValueError(f"unknown resting_mode {self.resting_mode!r}")
        if self.resting_mode == "from_t2" and (self.t2_spin is None or self.t2_spin <= 0):
            raise ValueError("t2_spin must be positive when resting_mode is from_t2")
        for k in DEFAULT_DURATIONS:
            if self.durations.get(k, 0) <= 0:
                raise ValueError(f"durations.{k} must be positive")

    def with_(self, **changes) -> "ErrorParams":
        return replace(self, **changes)

    @property
    def noiseless(self) -> bool:
        return (self.p_tqg == self.p_sqg == self.p_init == self.p_ro == 0
                and self.resting_mode == "none")


def default_params(p_tqg: float, **overrides) -> ErrorParams:
    """Rates tied to ``p_tqg``: ``p_sqg = p_tqg/10`` and ``p_init = p_ro = 2 p_tqg/30``."""
    p_tqg = _check_prob("p_tqg", p_tqg)
    base = dict(p_tqg=p_tqg, p_sqg=p_tqg / 10, p_init=p_tqg * 2 / 30, p_ro=p_tqg * 2 / 30)
    base.update(overrides)
    return ErrorParams(**base)


def noiseless_params() -> ErrorParams:
    return default_params(0.0)


def depolarizing_1q(p: float) -> KrausChannel:
    p = _check_prob("p", p)
    ops = [math.sqrt(1 - p) * PAULI_MATRICES["I"]]
    ops += [math.sqrt(p / 3) * PAULI_MATRICES[c] for c in "XYZ"]
    return KrausChannel(1, tuple(ops))


def depolarizing_2q(p: float) -> KrausChannel:
    p = _check_prob("p", p)
    ops = []
    for a, b in itertools.product("IXYZ", repeat=2):
        w = 1 - p if a == b == "I" else p / 15
        ops.append(math.sqrt(w) * np.kron(PAULI_MATRICES[a], PAULI_MATRICES[b]))
    return KrausChannel(2, tuple(ops))


def phase_damping_alpha(gamma: float) -> float:
    return (1 + math.sqrt(1 - gamma)) / 2


def phase_damping(gamma: float) -> KrausChannel:
    """Phase damping as a probabilistic ``Z``: ``sqrt(a) I`` and ``sqrt(1-a) Z``."""
    gamma = _check_prob("gamma", gamma)
    a = phase_damping_alpha(gamma)
    return KrausChannel(1, (math.sqrt(a) * PAULI_MATRICES["I"], math.sqrt(1 - a) * PAULI_MATRICES["Z"]))


def phase_damping_standard(gamma: float) -> KrausChannel:
    gamma = _check_prob("gamma", gamma)
    return KrausChannel(1, (np.diag([1, math.sqrt(1 - gamma)]), np.diag([0, math.sqrt(gamma)])))


def dephasing_z_probability(gamma: float) -> float:
    """Probability of the ``Z`` branch in the Pauli form of phase damping."""
    return 1 - phase_damping_alpha(gamma)


def gamma_from_t2(t: float, t2_spin: float) -> float:
    if t2_spin <= 0:
        raise ValueError("t2_spin must be positive")
    if t < 0:
        raise ValueError("idle time must be non-negative")
    if math.isinf(t2_spin):
        return 0.0
    return -math.expm1(-t / (2 * t2_spin))


def resting_gamma(op_kind: OpKind, params: ErrorParams) -> float:
    """Dephasing coefficient seen by each idle qubit during one operation."""
    if op_kind not in DEFAULT_DURATIONS:
        raise ValueError(f"unknown op kind {op_kind!r}")
    if params.resting_mode == "none":
        return 0.0
    if params.resting_mode == "scaled_by_p_tqg":
        return min(1.0, _SCALED_REST[op_kind] * params.p_tqg)
    return gamma_from_t2(params.durations[op_kind], params.t2_spin)


def noisy_init_state(p_init: float) -> DensityMatrix:
    p_init = _check_prob("p_init", p_init)
    return DensityMatrix(1, np.diag([1 - p_init, p_init]).astype(complex))


def readout_weights(p_ro: float, mode: ReadoutMode) -> tuple[tuple[float, float], tuple[float, float]]:
    """Coefficients ``((a, b), (c, d))`` so that declared_plus = a plus + b minus
    and declared_minus = c plus + d minus."""
    p_ro = _check_prob("p_ro", p_ro)
    if mode == "symmetric":
        return (1 - p_ro, p_ro), (p_ro, 1 - p_ro)
    if mode == "asymmetric":
        return (1.0, p_ro), (0.0, 1 - p_ro)
    raise ValueError(f"unknown readout mode {mode!r}")


def declare(plus, minus, p_ro: float, mode: ReadoutMode):
    """Mix measurement branches into declared branches (any branch backend)."""
    (a, b), (c, d) = readout_weights(p_ro, mode)

    def mix(u, v):
        if v == 0:
            return plus.scale(u)
        if u == 0:
            return minus.scale(v)
        return plus.scale(u).add(minus.scale(v))

    return mix(a, b), mix(c, d)


def noisy_readout(plus_branch: DensityMatrix, minus_branch: DensityMatrix, p_ro: float,
                  mode: ReadoutMode = "symmetric") -> tuple[DensityMatrix, DensityMatrix]:
    return declare(plus_branch, minus_branch, p_ro, mode)
