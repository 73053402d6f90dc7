"""Vectorized Pauli-frame propagation over many shots.

Each shot carries the Pauli error ``X^x Z^z`` relative to the ideal circuit.
Because every ideal readout in the protocols has a deterministic outcome of
``0``, a measured bit is simply the ``x`` component of the frame on the
measured qubit, optionally flipped by a declaration error. This module is
independent of the density-matrix engines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import ErrorParams, dephasing_z_probability, resting_gamma
from .scheduler import ScheduledOp

# letter index 0..3 = I, X, Y, Z
_LX = np.array([0, 1, 1, 0], dtype=bool)
_LZ = np.array([0, 0, 1, 1], dtype=bool)


@dataclass
class FrameFault:
    """Fault injected after op ``index`` of the block run at ``key``.

    ``x``/``z`` are full-register bit vectors; ``flip`` flips the declared
    bit of a readout op instead.
    """

    key: object
    index: int
    x: np.ndarray
    z: np.ndarray
    flip: bool = False


def apply_ideal(op: ScheduledOp, X: np.ndarray, Z: np.ndarray) -> np.ndarray | None:
    """Propagate the frame through the ideal op; return measured bits for readouts."""
    k = op.kind
    if k == "sqg":
        q = op.qubits[0]
        g = op.gate
        if g == "H":
            tmp = X[:, q].copy()
            X[:, q] = Z[:, q]
            Z[:, q] = tmp
        elif g in ("S", "SDG"):
            Z[:, q] ^= X[:, q]
        elif g not in ("X", "Y", "Z", "I"):
            raise ValueError(f"gate {g!r} is not supported by the frame simulator")
    elif k == "tqg":
        c, t = op.qubits
        if op.gate == "CNOT":
            X[:, t] ^= X[:, c]
            Z[:, c] ^= Z[:, t]
        elif op.gate == "CZ":
            Z[:, c] ^= X[:, t]
            Z[:, t] ^= X[:, c]
        else:
            raise ValueError(f"gate {op.gate!r} is not supported by the frame simulator")
    elif k == "init":
        q = op.qubits[0]
        X[:, q] = False
        Z[:, q] = False
    elif k == "readout":
        q = op.qubits[0]
        bits = X[:, q].copy()
        Z[:, q] = False
        return bits
    elif k == "inject":
        X ^= op.pauli.x.astype(bool)
        Z ^= op.pauli.z.astype(bool)
    return None


def sample_noise(op: ScheduledOp, X: np.ndarray, Z: np.ndarray, bits: np.ndarray | None,
                 params: ErrorParams, active: frozenset, rng: np.random.Generator) -> None:
    """Sample the op's Pauli error, declaration error and resting dephasing."""
    s = X.shape[0]
    k = op.kind
    if k == "inject":
        return
    if k in ("sqg", "tqg"):
        p = params.p_sqg if k == "sqg" else params.p_tqg
        if p:
            hit = rng.random(s) < p
            nq = len(op.qubits)
            choice = rng.integers(1, 4 ** nq, size=s)
            for pos, q in enumerate(op.qubits):
                letter = (choice >> (2 * (nq - 1 - pos))) & 3
                X[:, q] ^= hit & _LX[letter]
                Z[:, q] ^= hit & _LZ[letter]
    elif k == "init":
        if params.p_init:
            X[:, op.qubits[0]] ^= rng.random(s) < params.p_init
    elif k == "readout":
        if params.p_ro:
            flip = rng.random(s) < params.p_ro
            if params.readout_mode == "asymmetric":
                flip &= bits
            bits ^= flip
    gamma = resting_gamma(k, params)
    if gamma:
        pz = dephasing_z_probability(gamma)
        for q in sorted(active - set(op.qubits)):
            Z[:, q] ^= rng.random(s) < pz


def next_active(op: ScheduledOp, active: frozenset, params: ErrorParams) -> frozenset:
    if op.kind == "init":
        return active | {op.qubits[0]}
    if op.kind == "readout" and not (op.keep or params.retired_ancillas_rest):
        return active - {op.qubits[0]}
    return active


def run_ops(ops, X, Z, params: ErrorParams, active: frozenset, rng=None,
            faults: dict | None = None) -> tuple[np.ndarray, frozenset]:
    """Run a block on all rows of ``X``/``Z`` in place.

    ``faults`` maps op index to ``(rows, x, z, flip)`` arrays for injected
    faults. Returns the ``(shots, n_readouts)`` declared bits and the final
    active set.
    """
    out = []
    for j, op in enumerate(ops):
        bits = apply_ideal(op, X, Z)
        if rng is not None:
            sample_noise(op, X, Z, bits, params, active, rng)
        if faults and j in faults:
            rows, fx, fz, flip = faults[j]
            X[rows] ^= fx
            Z[rows] ^= fz
            if bits is not None:
                bits[rows] ^= flip
        if bits is not None:
            out.append(bits)
        active = next_active(op, active, params)
    s = X.shape[0]
    arr = np.stack(out, axis=1) if out else np.zeros((s, 0), dtype=bool)
    return arr, active


@dataclass
class DriveResult:
    lookups: list  # (rows, table_key, data_x, data_z) recorded at table lookups
    finished: np.ndarray  # rows that ran to completion


def drive(protocol, X: np.ndarray, Z: np.ndarray, params: ErrorParams, rng=None,
          faults: list | None = None, stop_at_lookup: bool = False,
          active: frozenset | None = None) -> DriveResult:
    """Run ``protocol`` on every row of the frame arrays in place.

    Rows are grouped by protocol key so each block executes vectorized.
    ``faults`` optionally holds one :class:`FrameFault` (or ``None``) per row.
    With ``stop_at_lookup`` a row stops where the protocol would consult its
    flag-conditioned table. Its data error, mapped back to the unrotated
    frame, is then recorded instead.
    """
    n_rows = X.shape[0]
    nd = protocol.n_data
    if active is None:
        active = frozenset(range(nd))
    by_key: dict = {}
    if faults is not None:
        for row, flt in enumerate(faults):
            if flt is not None:
                by_key.setdefault(flt.key, []).append((row, flt))
    memo: dict = {}
    lookups = []
    finished = []
    groups = {(protocol.start_key(), active): np.arange(n_rows)}
    while groups:
        nxt: dict = {}
        for (key, act), rows in groups.items():
            ops = protocol.block(key)
            if ops is None:
                finished.append(rows)
                continue
            Xg, Zg = X[rows], Z[rows]
            fmap = None
            if key in by_key:
                pos = {r: i for i, r in enumerate(rows)}
                fmap = {}
                for row, flt in by_key[key]:
                    if row in pos:
                        fmap.setdefault(flt.index, []).append((pos[row], flt))
                fmap = {j: (np.array([p for p, _ in lst]),
                            np.array([f.x for _, f in lst], dtype=bool),
                            np.array([f.z for _, f in lst], dtype=bool),
                            np.array([f.flip for _, f in lst], dtype=bool))
                        for j, lst in fmap.items()}
            bits, act2 = run_ops(ops, Xg, Zg, params, act, rng, fmap)
            X[rows], Z[rows] = Xg, Zg
            if bits.shape[1] == 0:
                patterns, inverse = np.zeros((1, 0), dtype=bool), np.zeros(len(rows), dtype=int)
            else:
                patterns, inverse = np.unique(bits, axis=0, return_inverse=True)
                inverse = inverse.reshape(-1)
            for pi, pat in enumerate(patterns):
                sel = rows[inverse == pi]
                bt = tuple(int(b) for b in pat)
                if stop_at_lookup:
                    lp = protocol.lookup_point(key, bt)
                    if lp is not None:
                        table_key, rotated = lp
                        dx, dz = X[sel, :nd].copy(), Z[sel, :nd].copy()
                        for q in rotated:
                            dx[:, q], dz[:, q] = Z[sel, q], X[sel, q]
                        lookups.append((sel, table_key, dx, dz))
                        continue
                mk = (key, bt)
                if mk not in memo:
                    memo[mk] = protocol.advance(key, bt)
                nk, corr = memo[mk]
                if corr is not None:
                    X[np.ix_(sel, range(nd))] ^= corr.x.astype(bool)
                    Z[np.ix_(sel, range(nd))] ^= corr.z.astype(bool)
                nxt.setdefault((nk, act2), []).append(sel)
        groups = {k: np.concatenate(v) for k, v in nxt.items()}
    fin = np.concatenate(finished) if finished else np.zeros(0, dtype=int)
    return DriveResult(lookups, fin)
