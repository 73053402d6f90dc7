"""Adaptive syndrome-extraction protocols.

A protocol is a finite-state machine over hashable keys. ``block(key)`` gives
the next list of scheduled ops (``None`` once finished) and
``advance(key, bits)`` maps the declared readout bits of that block to the
next key and an optional noise-free data correction. Both the exact branch
engine and the Pauli-frame simulator drive the same definitions.

Qubit layout: data qubits ``0 .. n-1``, syndrome ancilla ``n`` and, for the
flag protocols, flag ancilla ``n + 1``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Hashable, Sequence

import numpy as np

from .codes import StabilizerCode, five_one_three, steane, surface9, SURFACE9_CHECKS
from .paulis import PauliString
from .scheduler import ScheduledOp, count_operations, init, readout, sqg, tqg

Key = Hashable


def H(q: int) -> ScheduledOp:
    return sqg("H", q)


def CNOT(c: int, t: int) -> ScheduledOp:
    return tqg("CNOT", c, t)


class Protocol:
    """Base class; subclasses define ``start_key``, ``block`` and ``advance``."""

    name: str = ""
    code: StabilizerCode
    n_ancillas: int = 0

    @property
    def n_data(self) -> int:
        return self.code.n

    @property
    def n_qubits(self) -> int:
        return self.code.n + self.n_ancillas

    @property
    def ancillas(self) -> tuple[int, ...]:
        return tuple(range(self.code.n, self.n_qubits))

    def start_key(self) -> Key:
        raise NotImplementedError

    def block(self, key: Key) -> tuple[ScheduledOp, ...] | None:
        raise NotImplementedError

    def advance(self, key: Key, bits: tuple[int, ...]) -> tuple[Key, PauliString | None]:
        raise NotImplementedError

    def lookup_point(self, key: Key, bits: tuple[int, ...]):
        """``(table_key, rotated_data_qubits)`` if finishing this block consults
        the flag-conditioned table, else ``None``."""
        return None

    # -- flag-conditioned decoding -------------------------------------------
    @cached_property
    def flag_table(self) -> dict:
        from .faults import build_flag_table

        table, conflicts = build_flag_table(self)
        self.flag_table_conflicts = conflicts
        return table

    def flagged_correction(self, trig, syndrome: tuple[int, ...]) -> PauliString:
        """Correction for an unflagged-round syndrome given the trigger class."""
        if trig is not None and trig[2]:
            c = self.flag_table.get((trig, syndrome))
            if c is not None:
                return c
        return self.code.correction(syndrome)

    def flag_table_text(self) -> str:
        lines = [f"# {self.name} flag-conditioned table: check,s,f | syndrome -> correction"]
        for (trig, syn), c in sorted(self.flag_table.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            lines.append(f"{trig[0]},{trig[1]},{trig[2]} | {''.join(map(str, syn))} -> {c.letters}")
        return "\n".join(lines) + "\n"

    # -- structural queries ------------------------------------------------
    def path_op_counts(self) -> list[int]:
        """Total counted ops for every distinct path of declared outcomes."""
        totals: set[int] = set()
        stack = [(self.start_key(), 0)]
        seen = set()
        while stack:
            key, acc = stack.pop()
            if (key, acc) in seen:
                continue
            seen.add((key, acc))
            ops = self.block(key)
            if ops is None:
                totals.add(acc)
                continue
            n_ops = count_operations(ops)["total"]
            n_ro = sum(op.kind == "readout" for op in ops)
            for bits in np.ndindex(*(2,) * n_ro) if n_ro else [()]:
                nk, _ = self.advance(key, tuple(int(b) for b in bits))
                stack.append((nk, acc + n_ops))
        return sorted(totals)

    def op_count_bounds(self) -> tuple[int, int]:
        counts = self.path_op_counts()
        return counts[0], counts[-1]

    def noiseless_path(self) -> list[tuple[Key, tuple[ScheduledOp, ...]]]:
        """Blocks visited when every declared bit is 0."""
        out = []
        key = self.start_key()
        while True:
            ops = self.block(key)
            if ops is None:
                return out
            out.append((key, ops))
            n_ro = sum(op.kind == "readout" for op in ops)
            key, _ = self.advance(key, (0,) * n_ro)

    def trace(self) -> list[ScheduledOp]:
        return [op for _, ops in self.noiseless_path() for op in ops]


def _frame_toggle(frame: frozenset, need: frozenset) -> list[ScheduledOp]:
    return [H(q) for q in sorted(frame ^ need)]


class FlagProtocol513(Protocol):
    """Two-ancilla flag extraction for the five-qubit code.

    The syndrome ancilla ``a`` starts in ``|+>`` and controls a CNOT onto each
    data qubit. Data qubits where the generator acts as ``Z`` are kept
    Hadamard-rotated while the check runs. Hadamards are only inserted where
    the rotation pattern changes between consecutive checks and are undone
    at the end. The flag ``f`` starts in ``|0>`` and is targeted by ``a``
    after the first and third data CNOT. It is initialized once per flagged
    stage and reused while it reads 0.

    Flagged stage: g1, g2, g3, g4. Any nonzero bit ends it and starts one
    unflagged round in the order g1, g2, g4, g3, decoded with the
    flag-conditioned table.
    """

    name = "513"
    n_ancillas = 2
    UNFLAGGED_ORDER = (0, 1, 3, 2)

    def __init__(self):
        self.code = five_one_three()
        self.a = self.code.n
        self.f = self.code.n + 1

    def _need(self, i: int) -> frozenset:
        return frozenset(q for q, c in enumerate(self.code.generators[i].letters) if c == "Z")

    def check_ops(self, i: int, frame: frozenset, flagged: bool, init_flag: bool) -> list[ScheduledOp]:
        a, f = self.a, self.f
        ops = _frame_toggle(frame, self._need(i))
        if init_flag:
            ops.append(init(f))
        ops += [init(a), H(a)]
        data = self.code.generators[i].support
        for idx, d in enumerate(data):
            ops.append(CNOT(a, d))
            if flagged and idx in (0, len(data) - 2):
                ops.append(CNOT(a, f))
        ops += [H(a), readout(a, f"s{i}")]
        if flagged:
            ops.append(readout(f, f"f{i}", keep=True))
        return ops

    def start_key(self):
        return ("F", 0, frozenset())

    def block(self, key):
        kind = key[0]
        if kind == "F":
            _, i, frame = key
            return tuple(self.check_ops(i, frame, True, init_flag=(i == 0)))
        if kind == "U":
            _, j, frame, trig, bits = key
            ops = [init(self.f)] if j == 0 else []
            ops += self.check_ops(self.UNFLAGGED_ORDER[j], frame, False, False)
            return tuple(ops)
        if kind == "R":
            return tuple(H(q) for q in sorted(key[1]))
        return None

    def advance(self, key, bits):
        kind = key[0]
        if kind == "F":
            _, i, _ = key
            frame = self._need(i)
            s, fl = bits
            if s or fl:
                return ("U", 0, frame, (i, s, fl), ()), None
            if i + 1 < 4:
                return ("F", i + 1, frame), None
            return ("R", frame, None), None
        if kind == "U":
            _, j, _, trig, acc = key
            frame = self._need(self.UNFLAGGED_ORDER[j])
            acc = acc + tuple(bits)
            if j + 1 < 4:
                return ("U", j + 1, frame, trig, acc), None
            syn = self._syndrome(acc)
            return ("R", frame, self.flagged_correction(trig, syn)), None
        if kind == "R":
            return ("D",), key[2]
        raise ValueError(f"no transition from {key!r}")

    def _syndrome(self, acc: Sequence[int]) -> tuple[int, ...]:
        syn = [0] * 4
        for pos, g in enumerate(self.UNFLAGGED_ORDER):
            syn[g] = int(acc[pos])
        return tuple(syn)

    def lookup_point(self, key, bits):
        if key[0] == "U" and key[1] == 3:
            _, j, _, trig, acc = key
            syn = self._syndrome(acc + tuple(bits))
            return (trig, syn), self._need(self.UNFLAGGED_ORDER[j])
        return None


class FlagProtocolSteane(Protocol):
    """Sequential flag extraction for the Steane code.

    Z-type checks use a ``|0>`` ancilla targeted by each data qubit. X-type
    checks conjugate their four data qubits with Hadamards and reuse the
    same circuit. The flag starts in ``|+>`` and controls a CNOT onto the
    ancilla after the first and before the last data CNOT, then it is
    measured in the X basis.

    Flagged stage: the six generators in order, exiting at the first nonzero
    bit. Then one unflagged round is decoded with the flag-conditioned table.
    A second round follows and, if it is nontrivial, a third round is decoded
    with the plain lookup table.
    """

    name = "steane"
    n_ancillas = 2

    def __init__(self):
        self.code = steane()
        self.a = self.code.n
        self.f = self.code.n + 1

    def check_ops(self, i: int, flagged: bool) -> list[ScheduledOp]:
        a, f = self.a, self.f
        g = self.code.generators[i]
        data = g.support
        x_type = self.code.check_types[i] == "X"
        ops = [H(d) for d in data] if x_type else []
        ops.append(init(a))
        if flagged:
            ops += [init(f), H(f)]
        for idx, d in enumerate(data):
            ops.append(CNOT(d, a))
            if flagged and idx in (0, len(data) - 2):
                ops.append(CNOT(f, a))
        if flagged:
            ops.append(H(f))
        ops.append(readout(a, f"s{i}"))
        if flagged:
            ops.append(readout(f, f"f{i}"))
        if x_type:
            ops += [H(d) for d in data]
        return ops

    def start_key(self):
        return ("F", 0)

    def block(self, key):
        kind = key[0]
        if kind == "F":
            return tuple(self.check_ops(key[1], True))
        if kind in ("R1", "R2", "R3"):
            return tuple(self.check_ops(key[1], False))
        return None

    def advance(self, key, bits):
        kind = key[0]
        m = self.code.n_generators
        if kind == "F":
            i = key[1]
            s, fl = bits
            if s or fl:
                return ("R1", 0, (i, s, fl), ()), None
            return (("F", i + 1) if i + 1 < m else ("D",)), None
        if kind == "R1":
            _, j, trig, acc = key
            acc = acc + tuple(bits)
            if j + 1 < m:
                return ("R1", j + 1, trig, acc), None
            return ("R2", 0, 0), self.flagged_correction(trig, acc)
        if kind == "R2":
            _, j, any_bit = key
            any_bit = int(any_bit or any(bits))
            if j + 1 < m:
                return ("R2", j + 1, any_bit), None
            return (("R3", 0, ()) if any_bit else ("D",)), None
        if kind == "R3":
            _, j, acc = key
            acc = acc + tuple(bits)
            if j + 1 < m:
                return ("R3", j + 1, acc), None
            return ("D",), self.code.correction(acc)
        raise ValueError(f"no transition from {key!r}")

    def lookup_point(self, key, bits):
        if key[0] == "R1" and key[1] == self.code.n_generators - 1:
            _, _, trig, acc = key
            return (trig, acc + tuple(bits)), frozenset()
        return None


class Surface9Protocol(Protocol):
    """Three rounds of the eight Surface-9 checks with one reused ancilla.

    X-type checks: ``|+>`` ancilla (init, H) controlling CNOTs onto the data,
    then H and readout. Z-type checks: ``|0>`` ancilla targeted by the data.
    CNOT orders keep hook errors perpendicular to the logical operator of
    the same type (X hooks vertical, Z hooks horizontal).

    Decoding runs separately for the Z-type checks (which see X errors) and
    the X-type checks. In round 2 a group's syndrome that repeats the round-1
    value (and is nonzero) is corrected with the code's lookup table and the
    group's reference resets to zero; otherwise the reference becomes the
    round-2 syndrome. After the group's round-3 checks a second lookup table,
    keyed on ``(reference, round-3 syndrome)``, gives the final correction
    (see :mod:`seqqec.surface_decoder`). ``decoder="streaming"`` replaces that
    table with the repeat rule used in round 2.

    ``defer_group`` leaves that group's round-3 decision open and ends in
    ``("D", (reference, syndrome))``; it exists to calibrate the table.
    """

    name = "surface9"
    n_ancillas = 1
    ROUNDS = 3
    ORDERS = {
        (1, 2, 4, 5): (1, 2, 4, 5),
        (3, 4, 6, 7): (3, 4, 6, 7),
        (0, 1): (0, 1),
        (7, 8): (7, 8),
        (0, 1, 3, 4): (0, 3, 1, 4),
        (4, 5, 7, 8): (4, 7, 5, 8),
        (2, 5): (2, 5),
        (3, 6): (3, 6),
    }

    def __init__(self, decoder: str = "table", table: dict | None = None,
                 defer_group: int | None = None):
        if decoder not in ("table", "streaming"):
            raise ValueError(f"unknown surface9 decoder {decoder!r}")
        self.code = surface9()
        self.a = self.code.n
        types = self.code.check_types
        self.groups = (tuple(i for i, t in enumerate(types) if t == "Z"),
                       tuple(i for i, t in enumerate(types) if t == "X"))
        self._group_of = {i: gi for gi, g in enumerate(self.groups) for i in g}
        self._pos_in_group = {i: g.index(i) for g in self.groups for i in g}
        self.decoder = decoder
        self.defer_group = defer_group
        if decoder == "table" and table is None:
            from .surface_decoder import load_round3_table

            table = load_round3_table()
        self.table = table

    def check_ops(self, i: int) -> list[ScheduledOp]:
        a = self.a
        support = self.code.generators[i].support
        order = self.ORDERS[tuple(support)]
        if self.code.check_types[i] == "X":
            return [init(a), H(a)] + [CNOT(a, d) for d in order] + [H(a), readout(a, f"s{i}")]
        return [init(a)] + [CNOT(d, a) for d in order] + [readout(a, f"s{i}")]

    def start_key(self):
        return ("S", 1, 0, (("x", ()), ("x", ())))

    def block(self, key):
        if key[0] == "S":
            return tuple(self.check_ops(key[2]))
        return None

    def group_correction(self, gi: int, syn: tuple[int, ...]) -> PauliString:
        full = [0] * self.code.n_generators
        for pos, i in enumerate(self.groups[gi]):
            full[i] = syn[pos]
        return self.code.correction(tuple(full))

    def round3_correction(self, gi: int, ref: tuple[int, ...], syn: tuple[int, ...]) -> PauliString | None:
        if self.decoder == "streaming":
            return self.group_correction(gi, syn) if syn == ref and any(syn) else None
        letters = self.table[gi][(ref, syn)]
        return None if set(letters) == {"I"} else PauliString(letters)

    @staticmethod
    def _combine(a: PauliString | None, b: PauliString | None) -> PauliString | None:
        if a is None:
            return b
        return a if b is None else a * b

    def advance(self, key, bits):
        _, r, i, state = key
        (bit,) = bits
        gi = self._group_of[i]
        pos = self._pos_in_group[i]
        st = list(state)
        correction = None
        if r < self.ROUNDS:
            mode, val = st[gi]
            if mode == "m" and val[pos] != bit:
                st[gi] = ("x", val[:pos] + (bit,))
            elif mode == "x":
                st[gi] = ("x", val + (bit,))
        else:
            _, ref, syn = st[gi]
            syn = syn + (bit,)
            st[gi] = ("t", ref, syn)
            if pos == len(self.groups[gi]) - 1:
                if gi == self.defer_group:
                    st[gi] = ("k", ref, syn)
                else:
                    correction = self.round3_correction(gi, ref, syn)
                    st[gi] = ("d",)
        m = self.code.n_generators
        if i + 1 < m:
            return ("S", r, i + 1, tuple(st)), correction
        if r == self.ROUNDS:
            kept = [g for g in st if g[0] == "k"]
            return ("D", kept[0][1:] if kept else ()), correction
        # end of rounds 1 and 2
        for g in range(2):
            mode, val = st[g]
            if mode == "m" and any(val) and r >= 2:
                correction = self._combine(correction, self.group_correction(g, val))
                val = (0,) * len(val)
            st[g] = ("t", val, ()) if r + 1 == self.ROUNDS else ("m", val)
        return ("S", r + 1, 0, tuple(st)), correction


PROTOCOLS = {"513": FlagProtocol513, "steane": FlagProtocolSteane, "surface9": Surface9Protocol}
_INSTANCES: dict[str, Protocol] = {}


def get_protocol(name: str) -> Protocol:
    key = str(name).lower()
    if key not in PROTOCOLS:
        raise ValueError(f"unknown code {name!r}; expected one of {sorted(PROTOCOLS)}")
    if key not in _INSTANCES:
        _INSTANCES[key] = PROTOCOLS[key]()
    return _INSTANCES[key]
