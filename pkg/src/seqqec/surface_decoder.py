"""Final-round lookup table for the Surface-9 decoder.

After two rounds the streaming rule leaves each check group with a
reference syndrome (zero after a round-2 correction, else the round-2
value). The round-3 table maps ``(reference, round-3 syndrome)`` to a data
correction of the group's type. Records that are clean in rounds 1-2 and
nonzero in round 3 are ambiguous between a late data error and a readout
error; the table picks corrections that stay correctable under both
readings, which the plain repeat rule cannot do.

The shipped table was produced by :func:`calibrate_round3_table` with its
default arguments. Calibration runs the exact engine with one group's final
decision left open and, for every ``(reference, syndrome)`` key, picks the
correction minimizing the failure mass after perfect correction, summed
over one state per Bloch axis. Ties go to the lowest weight, then to the
lexicographically smallest support. Coordinate descent reaches a fixed
point after two passes.

Text format, one entry per line::

    <group> <reference bits> <syndrome bits> <correction letters>

with group 0 for the Z-type checks and 1 for the X-type checks.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from importlib import resources

import numpy as np

TABLE_RESOURCE = "surface9_round3.txt"
CALIBRATION_P_TQG = 1e-3
_GROUP_LETTER = {0: "X", 1: "Z"}
# one state per axis; the opposite states give identical failure masses
_CALIBRATION_LABELS = (("0", "Z"), ("+", "X"), ("+i", "Y"))


def _bits(t) -> str:
    return "".join(str(int(b)) for b in t)


def format_table(table: dict) -> str:
    lines = ["# surface9 round-3 table: group reference syndrome -> correction"]
    for g in sorted(table):
        for (ref, syn), letters in sorted(table[g].items()):
            lines.append(f"{g} {_bits(ref)} {_bits(syn)} {letters}")
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> dict:
    table: dict = {0: {}, 1: {}}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        g, ref, syn, letters = line.split()
        key = (tuple(int(c) for c in ref), tuple(int(c) for c in syn))
        table[int(g)][key] = letters
    for g in (0, 1):
        if len(table[g]) != 256:
            raise ValueError(f"group {g} has {len(table[g])} entries, expected 256")
    return table


@lru_cache(maxsize=1)
def load_round3_table() -> dict:
    text = resources.files("seqqec.data").joinpath(TABLE_RESOURCE).read_text()
    return parse_table(text)


def streaming_table() -> dict:
    """The repeat rule written as a round-3 table (correct iff syndrome == reference)."""
    from .protocols import Surface9Protocol

    proto = Surface9Protocol(decoder="streaming")
    table: dict = {0: {}, 1: {}}
    for g in (0, 1):
        for ref in itertools.product((0, 1), repeat=4):
            for syn in itertools.product((0, 1), repeat=4):
                c = proto.round3_correction(g, ref, syn)
                table[g][(ref, syn)] = c.letters if c is not None else "I" * proto.code.n
    return table


def _candidates(letter: str, n: int) -> list[str]:
    out = ["".join(letter if b else "I" for b in bits) for bits in itertools.product((0, 1), repeat=n)]
    return sorted(out, key=lambda s: (sum(c != "I" for c in s), [q for q, c in enumerate(s) if c != "I"]))


def calibrate_round3_table(p_tqg: float = CALIBRATION_P_TQG, passes: int = 3,
                           start: dict | None = None) -> dict:
    """Coordinate-wise exact optimization of the round-3 table.

    Each pass re-optimizes group 0 with group 1 fixed, then group 1. Takes a
    few minutes.
    """
    from .ec import initial_state, run_protocol
    from .metrics import _failure_indicator
    from .noise import default_params
    from .paulis import PauliString
    from .protocols import Surface9Protocol

    params = default_params(p_tqg)
    table = {g: dict(v) for g, v in (start or streaming_table()).items()}
    n = 9
    for _ in range(passes):
        for g in (0, 1):
            proto = Surface9Protocol(decoder="table", table=table, defer_group=g)
            cands = _candidates(_GROUP_LETTER[g], n)
            paulis = [PauliString(c) for c in cands]
            agg: dict = {}
            for label, axis in _CALIBRATION_LABELS:
                res = run_protocol(proto, initial_state(proto, label), params)
                for o in res.outcomes:
                    st = o.state
                    fail = _failure_indicator(st, proto.code, axis)
                    vals = np.array([st.apply_pauli(c).w @ fail for c in paulis])
                    key = o.record[1]
                    agg[key] = agg.get(key, 0.0) + vals
            new = {}
            for ref in itertools.product((0, 1), repeat=4):
                for syn in itertools.product((0, 1), repeat=4):
                    v = agg.get((ref, syn))
                    if v is None:
                        new[(ref, syn)] = table[g][(ref, syn)]
                        continue
                    best = v.min()
                    j = int(np.nonzero(v <= best + 1e-12 * max(abs(best), 1e-300))[0][0])
                    new[(ref, syn)] = cands[j]
            table[g] = new
    return table
