"""Exact branch-summing execution of the error-correction protocols.

Branches are advanced one protocol block at a time. After every block,
branches that reach the same protocol key with the same active set and the
same reference frame are summed. This is exact because later evolution
depends only on those three things, and it keeps the branch count small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .codes import LABEL_AXIS, StabilizerCode, logical_basis
from .noise import ErrorParams
from .paulis import PauliString
from .protocols import Protocol, get_protocol
from .scheduler import ExecutionContext, ScheduledOp, count_operations, execute_op, inject, sqg
from .stabilizer_state import StabilizerMixture
from .state import DensityMatrix, partial_trace

Backend = Literal["dense", "stabilizer"]
BACKENDS = ("dense", "stabilizer")


@dataclass
class EcOutcome:
    """One merged protocol outcome with data-only state.

    ``record`` is the final protocol key, or the full declared-bit history
    when records are kept. ``ops_min``/``ops_max`` bound the op count over
    the paths merged into this outcome.
    """

    state: object
    record: tuple
    ops_min: int
    ops_max: int
    counts: dict = field(default_factory=dict)

    @property
    def trace(self) -> float:
        return self.state.trace

    @property
    def ops_used(self) -> int:
        if self.ops_min != self.ops_max:
            raise ValueError("merged outcome spans several op counts; use ops_min/ops_max")
        return self.ops_min


@dataclass
class EcResult:
    outcomes: list[EcOutcome]
    pruned_mass: float
    input_trace: float
    reference_label: str | None = None
    code: StabilizerCode | None = None

    @property
    def total_trace(self) -> float:
        return sum(o.trace for o in self.outcomes)

    @property
    def ops_min(self) -> int:
        return min(o.ops_min for o in self.outcomes)

    @property
    def ops_max(self) -> int:
        return max(o.ops_max for o in self.outcomes)

    def summed_state(self):
        out = None
        for o in self.outcomes:
            s = o.state.to_density_matrix() if isinstance(o.state, StabilizerMixture) else o.state
            out = s if out is None else out.add(s)
        return out


def flip_label(label: str) -> str:
    return {"0": "1", "1": "0", "+": "-", "-": "+", "+i": "-i", "-i": "+i"}[label]


def initial_state(protocol: Protocol, label: str, backend: Backend = "stabilizer"):
    """Logical basis state on the data with every ancilla in ``|0>``."""
    code = protocol.code
    n, n_tot = code.n, protocol.n_qubits
    if backend == "dense":
        psi = logical_basis(code)[label].amplitudes
        anc = np.zeros(2 ** (n_tot - n))
        anc[0] = 1
        v = np.kron(psi, anc)
        return DensityMatrix(n_tot, np.outer(v, v.conj()))
    if backend != "stabilizer":
        raise ValueError(f"unknown backend {backend!r}")
    pad = "I" * (n_tot - n)
    axis, sign = LABEL_AXIS[label]
    gens = [PauliString(g.letters + pad, g.phase) for g in code.generators]
    lop = code.logical(axis)
    gens.append(PauliString(lop.letters + pad, lop.phase * sign))
    gens += [PauliString.single(n_tot, q, "Z") for q in protocol.ancillas]
    return StabilizerMixture.from_stabilizers(gens)


@dataclass
class _Branch:
    state: object
    ctx: ExecutionContext
    ops_min: int
    ops_max: int
    record: tuple


def _apply_fault(outs, op: ScheduledOp, fault, n_qubits: int):
    if fault.flip and op.kind == "readout":
        outs = (outs[1], outs[0])
    if fault.pauli is not None:
        outs = tuple(o.apply_pauli(fault.pauli) for o in outs)
    return outs


def run_protocol(protocol: Protocol, state, params: ErrorParams, *,
                 prune_threshold: float = 0.0, rng: np.random.Generator | None = None,
                 fault=None, keep_records: bool = False,
                 ctx: ExecutionContext | None = None, trace_out: bool = True) -> EcResult:
    """Run one protocol on ``state`` and return every (merged) outcome.

    ``rng`` switches to sampling mode: one declared outcome is drawn per
    readout with its conditional probability and the surviving branch is
    rescaled to the parent trace. ``fault`` is a
    :class:`seqqec.faults.Fault` injected on its block.
    """
    n_tot = protocol.n_qubits
    if ctx is None:
        ctx = ExecutionContext.start(n_tot, params, range(protocol.n_data))
    input_trace = state.trace
    frontier = {("start",): _Branch(state, ctx, 0, 0, ())}
    keys = {("start",): protocol.start_key()}
    done: list[_Branch] = []
    done_keys: list = []
    pruned = 0.0
    block_cache: dict = {}
    while frontier:
        nxt: dict = {}
        nxt_keys: dict = {}
        for mk, br in frontier.items():
            key = keys[mk]
            if key not in block_cache:
                ops = protocol.block(key)
                block_cache[key] = (ops, count_operations(ops)["total"] if ops is not None else 0)
            ops, n_ops = block_cache[key]
            if ops is None:
                done.append(br)
                done_keys.append(key)
                continue
            leaves = [(br.state, br.ctx, ())]
            for j, op in enumerate(ops):
                new = []
                for st, cx, bits in leaves:
                    outs, ncx = execute_op(st, op, cx)
                    if fault is not None and fault.key == key and fault.index == j:
                        outs = _apply_fault(outs, op, fault, n_tot)
                    if len(outs) == 1:
                        new.append((outs[0], ncx, bits))
                        continue
                    if rng is not None:
                        t = np.array([max(o.trace, 0.0) for o in outs])
                        if t.sum() <= 0:
                            continue
                        b = int(rng.random() >= t[0] / t.sum())
                        new.append((outs[b].scale(st.trace / t[b]), ncx, bits + (b,)))
                        continue
                    for b, o in enumerate(outs):
                        tr = o.trace
                        if tr <= prune_threshold:
                            pruned += max(tr, 0.0)
                            continue
                        new.append((o, ncx, bits + (b,)))
                leaves = new
            for st, cx, bits in leaves:
                nk, corr = protocol.advance(key, bits)
                if corr is not None:
                    st = st.apply_pauli(PauliString(corr.letters + "I" * (n_tot - protocol.n_data)))
                if isinstance(st, StabilizerMixture):
                    st = st.canonical()
                rec = br.record + (bits,) if keep_records else ()
                mkey = (nk, cx.active, st.merge_key(), rec)
                if mkey in nxt:
                    old = nxt[mkey]
                    old.state = old.state.add(st)
                    old.ops_min = min(old.ops_min, br.ops_min + n_ops)
                    old.ops_max = max(old.ops_max, br.ops_max + n_ops)
                else:
                    nxt[mkey] = _Branch(st, cx, br.ops_min + n_ops, br.ops_max + n_ops, rec)
                    nxt_keys[mkey] = nk
        frontier, keys = nxt, nxt_keys
    outcomes = []
    for br, key in zip(done, done_keys):
        st = br.state
        if trace_out:
            st = _data_only(st, protocol)
        outcomes.append(EcOutcome(st, br.record if keep_records else key, br.ops_min,
                                  br.ops_max, br.ctx.op_counter))
    return EcResult(outcomes, pruned, input_trace, code=protocol.code)


def _data_only(state, protocol: Protocol):
    if isinstance(state, StabilizerMixture):
        return state.trace_out(protocol.ancillas)
    return partial_trace(state, range(protocol.n_data))


def logical_not_ops(code: StabilizerCode, label: str, n_g: int, noisy: bool = True) -> list[ScheduledOp]:
    """``n_g`` logical NOTs as physical Pauli gates on the weight-3 representative.

    Z-axis and Y-axis states use ``X_L`` and X-axis states use ``Z_L``.
    """
    axis = LABEL_AXIS[label][0]
    lop = code.logical_z if axis == "X" else code.logical_x
    one = []
    for q in lop.support:
        if noisy:
            one.append(sqg(lop.letters[q], q))
        else:
            one.append(inject(PauliString.single(code.n, q, lop.letters[q])))
    return one * n_g


def run_ec(code_name: str, branch, params: ErrorParams, **kwargs) -> EcResult:
    """Dispatch one EC round by code name (``513``, ``steane`` or ``surface9``)."""
    return run_protocol(get_protocol(code_name), branch, params, **kwargs)


def flag_ec_513(branch, params: ErrorParams, **kwargs) -> EcResult:
    return run_ec("513", branch, params, **kwargs)


def flag_ec_steane(branch, params: ErrorParams, **kwargs) -> EcResult:
    return run_ec("steane", branch, params, **kwargs)


def surface9_ec(branch, params: ErrorParams, **kwargs) -> EcResult:
    return run_ec("surface9", branch, params, **kwargs)


def run_logical_experiment(code_name: str, label: str, params: ErrorParams, *, n_g: int = 0,
                           noisy_not: bool = True, backend: Backend = "stabilizer",
                           prune_threshold: float = 0.0, rng=None, fault=None,
                           prefix_ops: Sequence[ScheduledOp] | None = None) -> EcResult:
    """Prepare ``label``, apply an optional prefix of logical NOTs, then one EC round."""
    protocol = get_protocol(code_name)
    state = initial_state(protocol, label, backend)
    ctx = ExecutionContext.start(protocol.n_qubits, params, range(protocol.n_data))
    ops = list(prefix_ops) if prefix_ops is not None else logical_not_ops(protocol.code, label, n_g, noisy_not)
    ref = label
    for op in ops:
        (state,), ctx = execute_op(state, op, ctx)
    if n_g % 2 == 1 and prefix_ops is None:
        ref = flip_label(label)
    ctx = ExecutionContext.start(protocol.n_qubits, params, range(protocol.n_data))
    res = run_protocol(protocol, state, params, prune_threshold=prune_threshold, rng=rng,
                       fault=fault, ctx=ctx)
    res.reference_label = ref
    return res


@dataclass
class BatchedEcResult:
    """One protocol run whose weight columns correspond to ``n_gs``.

    ``flipped[j]`` says whether column ``j`` ends in the opposite logical
    state of ``label`` when noiseless.
    """

    result: EcResult
    label: str
    n_gs: tuple[int, ...]
    flipped: np.ndarray


def run_batched_not_experiment(code_name: str, label: str, params: ErrorParams,
                               n_gs: Sequence[int], *, prune_threshold: float = 0.0,
                               noisy_not: bool = True) -> BatchedEcResult:
    """``run_logical_experiment`` for several NOT counts in a single EC run.

    Every prefix op is an ideal Pauli followed by Pauli noise, so all prefixes
    share the reference stabilizer state once the ideal logical flip is
    written as a Pauli frame instead of a sign change. The protocol then runs
    once on a ``(2^n, len(n_gs))`` weight array.
    """
    n_gs = tuple(int(g) for g in n_gs)
    if not n_gs or min(n_gs) < 0:
        raise ValueError("n_gs must be a non-empty list of non-negative counts")
    protocol = get_protocol(code_name)
    code = protocol.code
    start = initial_state(protocol, label, "stabilizer")
    one_not = logical_not_ops(code, label, 1, noisy_not)
    axis = LABEL_AXIS[label][0]
    lop = code.logical_z if axis == "X" else code.logical_x
    pad = "I" * (protocol.n_qubits - code.n)
    frame = PauliString(lop.letters + pad)
    ctx = ExecutionContext.start(protocol.n_qubits, params, range(protocol.n_data))
    columns = {}
    state = start
    for k in range(max(n_gs) + 1):
        if k in n_gs:
            col = state
            if k % 2 == 1:
                # undo the ideal sign flip and carry it as a frame instead
                for q in lop.support:
                    col = col.gate(lop.letters[q], [q])
                col = col.apply_pauli(frame)
            if not (np.array_equal(col.rs, start.rs) and np.array_equal(col.xs, start.xs)):
                raise RuntimeError("prefix left the reference stabilizer state")
            columns[k] = col.w
        if k < max(n_gs):
            for op in one_not:
                (state,), ctx = execute_op(state, op, ctx)
    w = np.stack([columns[g] for g in n_gs], axis=1)
    batched = StabilizerMixture(start.xs, start.zs, start.rs, w)
    ctx = ExecutionContext.start(protocol.n_qubits, params, range(protocol.n_data))
    res = run_protocol(protocol, batched, params, prune_threshold=prune_threshold, ctx=ctx)
    res.reference_label = label
    return BatchedEcResult(res, label, n_gs, np.array([g % 2 == 1 for g in n_gs]))
