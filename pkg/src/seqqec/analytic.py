"""Closed-form gain model and resting-error budget.

A circuit of ``n_g`` logical NOTs (three physical gates each) followed by an
EC round of ``N`` operations fails, to leading order, when two of its
``N + 3 n_g`` operations fail in an uncorrectable pair. With ``C`` the
inverse fraction of such pairs the logical error is
``p^2 (N + 3 n_g)(N + 3 n_g - 1) / C`` and the physical circuit's error is
``p n_g``, giving the gain

    g = (C / p) * n_g / ((N + 3 n_g)(N + 3 n_g - 1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class GainModelParams:
    N: int
    C: float
    p: float
    n_g: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.n_g < 0:
            raise ValueError("n_g must be non-negative")


def _pair_denominator(N: int, n_g: int) -> float:
    m = N + 3 * n_g
    return float(m * (m - 1))


def model_gain(params: GainModelParams) -> float:
    """Leading-order gain ``(C/p) n_g / ((N+3n_g)(N+3n_g-1))``."""
    if params.n_g == 0:
        return 0.0
    den = _pair_denominator(params.N, params.n_g)
    if den <= 0:
        raise ValueError("fewer than two error locations")
    return params.C / params.p * params.n_g / den


def physical_error_2nd_order(p: float, n_g: int) -> float:
    """``1 - (1 - p)^n_g`` expanded to second order in ``p``."""
    return p * n_g - p * p * n_g * (n_g - 1) / 2


def model_gain_2nd_order(params: GainModelParams) -> float:
    """Gain with the physical error expanded to second order.

    Reduces to :func:`model_gain` as ``p -> 0``.
    """
    if params.n_g == 0:
        return 0.0
    den = _pair_denominator(params.N, params.n_g)
    if den <= 0:
        raise ValueError("fewer than two error locations")
    eps = physical_error_2nd_order(params.p, params.n_g)
    return params.C / params.p ** 2 * eps / den


def optimal_ng(N: int) -> int:
    """Integer maximizer of :func:`model_gain` over ``n_g``.

    Stationarity gives ``N^2 - N - 9 n_g^2 = 0``; the rounded root is checked
    against both neighbours (ties go to the smaller count).
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    guess = round(math.sqrt(N * N - N) / 3)
    best = None
    for n in (guess - 1, guess, guess + 1):
        if n < 0:
            continue
        g = model_gain(GainModelParams(N, 1.0, 0.5, n))
        if best is None or g > best[0]:
            best = (g, n)
    return best[1]


def weight_two_error_rate(N: int, p: float) -> float:
    """``p^2 N (N - 1) / 2``: probability weight of failing operation pairs."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return p * p * N * (N - 1) / 2


def resting_budget(n_qubits: int, p_rest: float, p_gate: float) -> tuple[float, bool]:
    """Resting error accumulated per operation and whether it is negligible.

    Negligible means at least an order of magnitude below the gate error.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    single = (n_qubits - 1) * p_rest
    return single, single <= p_gate / 10 * (1 + 1e-12)


def scaled_t2_ratio(n_qubits: int, reference_qubits: int, reference_ratio: float) -> float:
    """T2,spin / T2,opt needed to keep ``(n - 1) p_rest`` at the reference level.

    ``p_rest`` falls as ``1 / T2,spin`` for short idles, so the requirement
    grows linearly in the number of idle qubits.
    """
    if n_qubits < 2 or reference_qubits < 2:
        raise ValueError("need at least two qubits")
    return reference_ratio * (n_qubits - 1) / (reference_qubits - 1)


def implied_c(eps_phys: float, eps_logical: float, N: int, n_g: int, p: float) -> float:
    """The ``C`` that makes the model reproduce a measured gain."""
    if n_g <= 0 or eps_logical <= 0:
        raise ValueError("need n_g > 0 and a positive logical error")
    return eps_phys * p * _pair_denominator(N, n_g) / (n_g * eps_logical)


def figure4_grid(N: int = 75, C: float = 1.0, ps: Iterable[float] = (1e-4, 1e-3, 1e-2),
                 n_gs: Iterable[int] = range(0, 201)) -> list[dict]:
    """Rows of ``(p, n_g, gain, gain_2nd_order)`` for the model-gain figure."""
    rows = []
    for p in ps:
        for n in n_gs:
            prm = GainModelParams(N, C, p, int(n))
            rows.append({"p": p, "n_g": int(n), "gain": model_gain(prm),
                         "gain_2nd_order": model_gain_2nd_order(prm)})
    return rows


def argmax_ng(values: dict[int, float]) -> int:
    """Smallest ``n_g`` attaining the maximum of a ``{n_g: gain}`` map."""
    keys = sorted(values)
    arr = np.array([values[k] for k in keys])
    return keys[int(np.argmax(arr))]
