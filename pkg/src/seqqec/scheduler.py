"""Sequential execution of scheduled operations with gate and resting noise.

One operation runs at a time. After the ideal operation and its own error
process, every other qubit in the active set dephases for the duration of
the operation. The active set holds the data qubits plus initialized,
not yet retired ancillas.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

from .noise import ErrorParams, declare, resting_gamma
from .paulis import PauliString

OpKindName = Literal["sqg", "tqg", "init", "readout", "inject"]
COUNTED_KINDS = ("sqg", "tqg", "init", "readout")


@dataclass(frozen=True)
class ScheduledOp:
    """One sequential operation.

    ``keep`` marks a readout whose qubit stays active afterwards (it is
    reused without reinitialization).
    """

    kind: OpKindName
    qubits: tuple[int, ...] = ()
    gate: str | None = None
    label: str | None = None
    pauli: PauliString | None = None
    keep: bool = False

    def __post_init__(self):
        if self.kind not in ("sqg", "tqg", "init", "readout", "inject"):
            raise ValueError(f"unknown op kind {self.kind!r}")
        expected = {"sqg": 1, "tqg": 2, "init": 1, "readout": 1, "inject": 0}[self.kind]
        if len(self.qubits) != expected:
            raise ValueError(f"{self.kind} acts on {expected} qubit(s), got {self.qubits}")
        if self.kind == "tqg" and self.qubits[0] == self.qubits[1]:
            raise ValueError("two-qubit gate needs distinct qubits")
        if self.kind == "inject" and self.pauli is None:
            raise ValueError("inject needs a Pauli")

    def duration(self, params: ErrorParams) -> float:
        return 0.0 if self.kind == "inject" else params.durations[self.kind]

    def describe(self) -> str:
        if self.kind == "inject":
            return f"inject {self.pauli}"
        name = self.gate or ""
        extra = f" {self.label}" if self.label else ""
        return f"{self.kind} {name} {','.join(map(str, self.qubits))}{extra}".replace("  ", " ")


def sqg(gate: str, q: int) -> ScheduledOp:
    return ScheduledOp("sqg", (q,), gate=gate.upper())


def tqg(gate: str, control: int, target: int) -> ScheduledOp:
    return ScheduledOp("tqg", (control, target), gate=gate.upper())


def init(q: int) -> ScheduledOp:
    return ScheduledOp("init", (q,))


def readout(q: int, label: str | None = None, keep: bool = False) -> ScheduledOp:
    return ScheduledOp("readout", (q,), label=label, keep=keep)


def inject(pauli: PauliString) -> ScheduledOp:
    return ScheduledOp("inject", pauli=pauli)


@dataclass(frozen=True)
class ExecutionContext:
    """Per-branch bookkeeping: register size, active set and op counts."""

    n_qubits: int
    params: ErrorParams
    active: frozenset = frozenset()
    counts: tuple = ()  # sorted (kind, count) pairs

    @classmethod
    def start(cls, n_qubits: int, params: ErrorParams, active: Iterable[int]) -> "ExecutionContext":
        return cls(n_qubits, params, frozenset(active), ())

    @property
    def op_counter(self) -> dict[str, int]:
        return dict(self.counts)

    @property
    def total_ops(self) -> int:
        return sum(c for _, c in self.counts)

    def after(self, op: ScheduledOp) -> "ExecutionContext":
        if op.kind == "inject":
            return self
        counts = Counter(dict(self.counts))
        counts[op.kind] += 1
        active = self.active
        q = op.qubits[0]
        if op.kind == "init":
            active = active | {q}
        elif op.kind == "readout" and not (op.keep or self.params.retired_ancillas_rest):
            active = active - {q}
        return replace(self, active=active, counts=tuple(sorted(counts.items())))


def resting_qubits(op: ScheduledOp, ctx: ExecutionContext) -> tuple[int, ...]:
    if op.kind == "inject":
        return ()
    return tuple(sorted(ctx.active - set(op.qubits)))


def execute_op(branch, op: ScheduledOp, ctx: ExecutionContext):
    """Run one operation on a branch.

    Returns ``(branches, new_ctx)``. ``branches`` has two entries (declared
    ``+1`` then ``-1``) for a readout and one entry otherwise. Works with any
    branch object that implements the shared branch API.
    """
    params = ctx.params
    for q in op.qubits:
        if q >= ctx.n_qubits:
            raise IndexError(f"qubit {q} outside register of {ctx.n_qubits}")
    if op.kind == "inject":
        return (branch.apply_pauli(op.pauli),), ctx
    if op.kind == "sqg":
        out = branch.gate(op.gate, op.qubits).depolarize(op.qubits, params.p_sqg)
        outs = (out,)
    elif op.kind == "tqg":
        out = branch.gate(op.gate, op.qubits).depolarize(op.qubits, params.p_tqg)
        outs = (out,)
    elif op.kind == "init":
        outs = (branch.reset(op.qubits[0], params.p_init),)
    else:
        plus, minus = branch.measure(op.qubits[0])
        outs = declare(plus, minus, params.p_ro, params.readout_mode)
    rest = resting_qubits(op, ctx)
    gamma = resting_gamma(op.kind, params)
    if gamma and rest:
        outs = tuple(b.dephase(rest, gamma) for b in outs)
    return outs, ctx.after(op)


@dataclass(frozen=True)
class Leaf:
    record: tuple  # ((label, bit), ...)
    state: object
    ctx: ExecutionContext


@dataclass
class BranchTree:
    leaves: list[Leaf] = field(default_factory=list)
    pruned_mass: float = 0.0

    @property
    def total_trace(self) -> float:
        return sum(leaf.state.trace for leaf in self.leaves)

    def summed_state(self):
        out = None
        for leaf in self.leaves:
            out = leaf.state if out is None else out.add(leaf.state)
        return out


def execute_sequence(rho, ops: Sequence[ScheduledOp], ctx: ExecutionContext,
                     prune_threshold: float = 0.0, max_leaves: int = 1 << 16) -> BranchTree:
    """Depth-first expansion over readout outcomes."""
    tree = BranchTree()

    def walk(state, ctx, i, record):
        if i == len(ops):
            tree.leaves.append(Leaf(record, state, ctx))
            if len(tree.leaves) > max_leaves:
                raise RuntimeError("branch budget exceeded")
            return
        op = ops[i]
        outs, nctx = execute_op(state, op, ctx)
        for bit, b in enumerate(outs):
            if len(outs) > 1 and b.trace < prune_threshold:
                tree.pruned_mass += max(b.trace, 0.0)
                continue
            rec = record + ((op.label, bit),) if op.kind == "readout" else record
            walk(b, nctx, i + 1, rec)

    walk(rho, ctx, 0, ())
    return tree


def count_operations(ops: Iterable[ScheduledOp]) -> dict[str, int]:
    """Per-kind counts plus ``total``; inject ops are not counted."""
    counts = {k: 0 for k in COUNTED_KINDS}
    for op in ops:
        if op.kind in counts:
            counts[op.kind] += 1
    counts["total"] = sum(counts[k] for k in COUNTED_KINDS)
    return counts


def trace_lines(ops: Iterable[ScheduledOp], params: ErrorParams) -> list[str]:
    """Line-oriented audit trace: kind, targets, duration and resting gamma."""
    lines = []
    for op in ops:
        if op.kind == "inject":
            lines.append(f"inject\t{op.pauli}\t0\t0")
            continue
        g = resting_gamma(op.kind, params)
        name = f"{op.gate}" if op.gate else (op.label or "")
        lines.append(f"{op.kind}\t{name}\t{','.join(map(str, op.qubits))}\t"
                     f"{op.duration(params):.3e}\t{g:.6e}")
    return lines
