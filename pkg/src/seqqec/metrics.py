"""Logical error rate of a post-EC state.

After one round of perfect (noiseless) correction the data state lies in
the codespace. Its logical content is the 2x2 matrix
``1/2 [Tr(rho) I + <X_L> X + <Y_L> Y + <Z_L> Z]`` and the logical error is one
minus its fidelity with the ideal logical state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .codes import BASIS_LABELS, LABEL_AXIS, StabilizerCode, get_code, stabilizer_group
from .paulis import PAULI_MATRICES, PauliString
from .stabilizer_state import StabilizerMixture, _index_bits
from .state import DensityMatrix, expectation


@dataclass(frozen=True)
class ReducedLogicalState:
    matrix: np.ndarray

    def fidelity(self, label: str) -> float:
        psi = LOGICAL_VECTORS[label]
        return float(np.real(psi.conj() @ self.matrix @ psi))


_R = 1 / np.sqrt(2)
LOGICAL_VECTORS = {
    "0": np.array([1, 0], dtype=complex), "1": np.array([0, 1], dtype=complex),
    "+": np.array([_R, _R], dtype=complex), "-": np.array([_R, -_R], dtype=complex),
    "+i": np.array([_R, 1j * _R], dtype=complex), "-i": np.array([_R, -1j * _R], dtype=complex),
}


def _bloch_to_dm(tr: float, ex: float, ey: float, ez: float) -> np.ndarray:
    m = tr * PAULI_MATRICES["I"] + ex * PAULI_MATRICES["X"] + ey * PAULI_MATRICES["Y"] + ez * PAULI_MATRICES["Z"]
    return 0.5 * m


def reduced_logical_dm(rho: DensityMatrix, code: StabilizerCode, check: bool = True) -> ReducedLogicalState:
    """Reduce a codespace state (after perfect correction) to one logical qubit."""
    tr = rho.trace
    if tr <= 0:
        raise ValueError("zero-trace state")
    if check:
        for g in code.generators:
            if abs(expectation(rho, g) - tr) > 1e-8:
                raise ValueError("state is not in the codespace; apply perfect_ec first")
    ex, ey, ez = (expectation(rho, code.logical(a)) for a in "XYZ")
    return ReducedLogicalState(_bloch_to_dm(1.0, ex / tr, ey / tr, ez / tr))


@lru_cache(maxsize=None)
def _ec_tables(code_name: str):
    code = get_code(code_name)
    group = stabilizer_group(code.generators)  # index t <-> subset bits over generators
    m = code.n_generators
    syndromes = list(np.ndindex(*(2,) * m))
    # sign of the correction's action on each logical, per syndrome
    signs = {a: np.array([1.0 if code.correction(s).commutes(code.logical(a)) else -1.0 for s in syndromes])
             for a in "XYZ"}
    # (-1)^{s . t} with s, t both enumerated in ndindex order
    bits = np.array(syndromes, dtype=np.int64)
    walsh = 1.0 - 2.0 * ((bits @ bits.T) & 1)
    return group, signs, walsh


def ec_logical_expectations(rho: DensityMatrix, code: StabilizerCode) -> tuple[float, float, float, float]:
    """``(Tr, <X_L>, <Y_L>, <Z_L>)`` of ``perfect_ec(rho)`` without forming it.

    Uses ``Tr(L C_s P_s rho C_s) = +-Tr(L P_s rho)`` and expands each
    syndrome projector ``P_s`` over the stabilizer group.
    """
    group, signs, walsh = _ec_tables(code.name)
    m = code.n_generators
    tr = rho.trace
    out = [tr]
    for a in "XYZ":
        lop = code.logical(a)
        v = np.array([expectation(rho, lop * s) for s in group])
        per_syndrome = walsh @ v / 2 ** m
        out.append(float(signs[a] @ per_syndrome))
    return tuple(out)


def stabilizer_failure_mass(state: StabilizerMixture, code: StabilizerCode, axis: str):
    """Probability weight of classes that perfect correction leaves flipped
    with respect to the reference logical ``axis``.

    Returns a float, or one value per column for batched weights.
    """
    fail = _failure_indicator(state, code, axis)
    if state.w.ndim == 2:
        return fail @ state.w
    return float(state.w @ fail)


def _failure_indicator(state: StabilizerMixture, code: StabilizerCode, axis: str) -> np.ndarray:
    lop = code.logical(axis)
    for g in code.generators:
        if state.contains(g) != 1:
            raise ValueError("reference state is not a +1 codespace state")
    if state.contains(lop) == 0:
        raise ValueError(f"reference state is not a logical {axis} eigenstate")
    n = state.n_qubits
    destab = state.destabilizers()
    m = code.n_generators
    syn_int = np.array([int("".join(map(str, code.syndrome(d))), 2) for d in destab], dtype=np.int64)
    lam = np.array([0 if d.commutes(lop) else 1 for d in destab], dtype=np.int64)
    bits = _index_bits(n).astype(np.int64)
    syn = np.zeros(2 ** n, dtype=np.int64)
    for i in range(n):
        syn ^= bits[:, i] * syn_int[i]
    flip_corr = _correction_flip(code.name, axis)
    return (flip_corr[syn] ^ ((bits @ lam) & 1)).astype(float)


@lru_cache(maxsize=None)
def _correction_flip(code_name: str, axis: str) -> np.ndarray:
    code = get_code(code_name)
    m = code.n_generators
    lop = code.logical(axis)
    out = np.zeros(2 ** m, dtype=np.int64)
    for s in np.ndindex(*(2,) * m):
        idx = int("".join(map(str, s)), 2) if m else 0
        out[idx] = 0 if code.correction(s).commutes(lop) else 1
    return out


@dataclass(frozen=True)
class ErrorEstimate:
    """Logical error with the pruned mass counted as error (``upper``) or
    ignored (``lower``)."""

    lower: float
    upper: float
    pruned_mass: float

    @property
    def value(self) -> float:
        return self.upper


def logical_error_bounds(outcomes: Iterable, label: str, code: StabilizerCode,
                         pruned_mass: float = 0.0) -> ErrorEstimate:
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("empty outcome set")
    axis, sign = LABEL_AXIS[label]
    total = 0.0
    fail = 0.0
    dense = None
    for o in outcomes:
        st = getattr(o, "state", o)
        if isinstance(st, StabilizerMixture):
            total += st.trace
            fail += stabilizer_failure_mass(st, code, axis)
        else:
            dense = st if dense is None else dense.add(st)
    if dense is not None:
        tr, ex, ey, ez = ec_logical_expectations(dense, code)
        bloch = {"X": ex, "Y": ey, "Z": ez}[axis]
        total += tr
        fail += 0.5 * (tr - sign * bloch)
    if total <= 0:
        raise ValueError("outcomes carry no probability")
    lower = min(max(fail / total, 0.0), 1.0)
    upper = min(max((fail + pruned_mass) / (total + pruned_mass), 0.0), 1.0)
    return ErrorEstimate(lower, upper, pruned_mass)


def logical_error_rate(final, ideal: str | None = None, code: StabilizerCode | None = None) -> float:
    """Logical error of an EC result (or outcome list) against ``ideal``.

    Pruned probability, if any, counts as error.
    """
    if hasattr(final, "outcomes"):
        code = code or final.code
        ideal = ideal or final.reference_label
        return logical_error_bounds(final.outcomes, ideal, code, final.pruned_mass).upper
    return logical_error_bounds(final, ideal, code).upper


def bloch_average_error(code_name: str, params, n_g: int = 0, *, backend: str = "stabilizer",
                        labels: Sequence[str] = BASIS_LABELS, prune_threshold: float = 0.0,
                        noisy_not: bool = True) -> dict:
    """Mean logical error over the six Bloch-axis states after one EC round.

    Returns ``{"mean", "per_state", "pruned_mass", "ops_min", "ops_max", "lower"}``.
    """
    from .ec import run_logical_experiment

    per, lower, pruned, omin, omax = {}, {}, 0.0, None, None
    for label in labels:
        res = run_logical_experiment(code_name, label, params, n_g=n_g, backend=backend,
                                     prune_threshold=prune_threshold, noisy_not=noisy_not)
        est = logical_error_bounds(res.outcomes, res.reference_label, res.code, res.pruned_mass)
        per[label], lower[label] = est.upper, est.lower
        pruned = max(pruned, res.pruned_mass)
        omin = res.ops_min if omin is None else min(omin, res.ops_min)
        omax = res.ops_max if omax is None else max(omax, res.ops_max)
    return {"mean": float(np.mean(list(per.values()))), "per_state": per,
            "lower": float(np.mean(list(lower.values()))), "pruned_mass": pruned,
            "ops_min": omin, "ops_max": omax}


def batched_error_bounds(batch) -> list[ErrorEstimate]:
    """Per-column :class:`ErrorEstimate` of a batched NOT-prefix run.

    The pruned mass is tracked per branch as the largest column total, so it
    bounds every column's pruned mass from above.
    """
    res = batch.result
    axis = LABEL_AXIS[batch.label][0]
    k = len(batch.n_gs)
    total = np.zeros(k)
    fail = np.zeros(k)
    for o in res.outcomes:
        total += o.state.column_traces()
        fail += stabilizer_failure_mass(o.state, res.code, axis)
    # odd prefixes end in the opposite state: success and failure swap roles
    fail = np.where(batch.flipped, total - fail, fail)
    pm = res.pruned_mass
    out = []
    for t, f in zip(total, fail):
        if t <= 0:
            raise ValueError("outcomes carry no probability")
        out.append(ErrorEstimate(min(max(f / t, 0.0), 1.0),
                                 min(max((f + pm) / (t + pm), 0.0), 1.0), pm))
    return out


def bloch_average_error_grid(code_name: str, params, n_gs: Sequence[int], *,
                             labels: Sequence[str] = BASIS_LABELS, prune_threshold: float = 0.0,
                             noisy_not: bool = True) -> list[dict]:
    """:func:`bloch_average_error` at every ``n_g`` in ``n_gs`` (stabilizer backend).

    One protocol run per label covers the whole grid.
    """
    from .ec import run_batched_not_experiment

    n_gs = list(n_gs)
    per = [dict() for _ in n_gs]
    low = [dict() for _ in n_gs]
    pruned, omin, omax = 0.0, None, None
    for label in labels:
        batch = run_batched_not_experiment(code_name, label, params, n_gs,
                                           prune_threshold=prune_threshold, noisy_not=noisy_not)
        for j, est in enumerate(batched_error_bounds(batch)):
            per[j][label], low[j][label] = est.upper, est.lower
        res = batch.result
        pruned = max(pruned, res.pruned_mass)
        omin = res.ops_min if omin is None else min(omin, res.ops_min)
        omax = res.ops_max if omax is None else max(omax, res.ops_max)
    return [{"n_g": g, "mean": float(np.mean(list(p.values()))), "per_state": p,
             "lower": float(np.mean(list(lo.values()))), "pruned_mass": pruned,
             "ops_min": omin, "ops_max": omax} for g, p, lo in zip(n_gs, per, low)]
