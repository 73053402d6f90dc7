"""Single-fault enumeration and flag-conditioned table construction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .codes import stabilizer_group, _lex_key
from .frames import FrameFault, drive, next_active
from .noise import noiseless_params
from .paulis import PauliString


@dataclass(frozen=True)
class Fault:
    """One fault right after op ``index`` of the block run at ``key``.

    ``pauli`` acts on the whole register; ``flip`` flips a readout's declared bit.
    """

    key: object
    index: int
    pauli: PauliString | None = None
    flip: bool = False

    def describe(self) -> str:
        what = "flip" if self.flip else str(self.pauli)
        return f"{self.key} op {self.index}: {what}"


def fault_locations(protocol):
    """``(key, index, op, active_before)`` along the fault-free path.

    A single fault leaves the preceding part of the run fault-free, so only
    these locations can host it.
    """
    params = noiseless_params()
    active = frozenset(range(protocol.n_data))
    out = []
    for key, ops in protocol.noiseless_path():
        for j, op in enumerate(ops):
            out.append((key, j, op, active))
            active = next_active(op, active, params)
    return out


def enumerate_single_faults(protocol) -> list[Fault]:
    """Every single fault: any Pauli on an op's qubits, any single-qubit
    Pauli on an idle active qubit, and any readout declaration flip."""
    n = protocol.n_qubits
    faults = []
    seen = set()

    def add(f: Fault):
        sig = (f.key, f.index, f.pauli.letters if f.pauli else None, f.flip)
        if sig not in seen:
            seen.add(sig)
            faults.append(f)

    for key, j, op, active in fault_locations(protocol):
        if op.kind == "inject":
            continue
        qs = op.qubits
        for letters in itertools.product("IXYZ", repeat=len(qs)):
            if set(letters) == {"I"}:
                continue
            add(Fault(key, j, PauliString.from_sparse(n, dict(zip(qs, letters)))))
        for q in sorted(active - set(qs)):
            for c in "XYZ":
                add(Fault(key, j, PauliString.single(n, q, c)))
        if op.kind == "readout":
            add(Fault(key, j, None, flip=True))
    return faults


def to_frame_fault(f: Fault, n: int) -> FrameFault:
    if f.pauli is None:
        z = np.zeros(n, dtype=bool)
        return FrameFault(f.key, f.index, z, z.copy(), f.flip)
    return FrameFault(f.key, f.index, f.pauli.x.astype(bool), f.pauli.z.astype(bool), f.flip)


def _equivalent(e1: PauliString, e2: PauliString, code) -> bool:
    prod = e1 * e2
    if any(code.syndrome(prod)):
        return False
    return prod.commutes(code.logical_x) and prod.commutes(code.logical_z)


def build_flag_table(protocol):
    """Flag-conditioned decoder built from every single fault.

    Each fault is propagated at zero background noise until the protocol
    reaches its table lookup. For flagged triggers the key
    ``(trigger, syndrome)`` maps to the minimum-weight representative of
    the resulting data error. If inequivalent errors share a key, the
    lighter one wins and the clash is returned in ``conflicts``.
    """
    code = protocol.code
    n = protocol.n_qubits
    faults = enumerate_single_faults(protocol)
    rows = len(faults)
    X = np.zeros((rows, n), dtype=bool)
    Z = np.zeros((rows, n), dtype=bool)
    res = drive(protocol, X, Z, noiseless_params(), rng=None,
                faults=[to_frame_fault(f, n) for f in faults], stop_at_lookup=True)
    group = stabilizer_group(code.generators)
    classes: dict = {}
    for sel, table_key, dx, dz in res.lookups:
        trig, syn = table_key
        if not (trig and trig[2]):
            continue
        for i in range(len(sel)):
            e = PauliString.from_symplectic(dx[i], dz[i])
            if code.syndrome(e) != tuple(syn):
                raise RuntimeError(f"unflagged syndrome {syn} disagrees with propagated error {e}")
            reps = classes.setdefault(table_key, [])
            if not any(_equivalent(e, r, code) for r in reps):
                reps.append(e)
    table = {}
    conflicts = {}
    for table_key, reps in classes.items():
        best = [min(((r * s).unsigned() for s in group), key=_lex_key) for r in reps]
        best.sort(key=_lex_key)
        table[table_key] = best[0]
        if len(best) > 1:
            conflicts[table_key] = best
    return table, conflicts
