"""Exact Pauli-mixture representation of stabilizer-circuit density matrices.

Every state reachable from a stabilizer state by Clifford gates, Pauli
channels, ``Z`` measurements with deterministic ideal outcomes and resets is
a mixture

    rho = sum_b w[b] E_b rho0 E_b,

where ``rho0`` is a stabilizer state with generators ``g_0 .. g_{n-1}`` and
``E_b`` is any Pauli whose anticommutation pattern with the generators is the
bit string ``b`` (bit ``i`` of the integer index refers to ``g_i``). Cliffords
update the generators, Pauli errors permute ``w`` and the weights carry the
branch probability exactly, so this is not an approximation. The memory cost
is ``2^n`` floats instead of ``4^n`` complex numbers.

Generators are stored as ``i^r X^x Z^z`` with binary ``x``, ``z``.

``w`` may also be a ``(2^n, K)`` array. Each column is then an independent
mixture over the same reference state, which lets one protocol run serve
several inputs that differ only by Pauli noise.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Sequence

import numpy as np

from .paulis import PauliString, apply_to_vector, gf2_solve

_ALL_PAULI_GATES = ("X", "Y", "Z")


@lru_cache(maxsize=16)
def _index_bits(n: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


@lru_cache(maxsize=16)
def _weights_pow(n: int) -> np.ndarray:
    return (1 << np.arange(n)).astype(np.int64)


@lru_cache(maxsize=16)
def _arange(n: int) -> np.ndarray:
    return np.arange(2 ** n)


_PAULI_TERMS = {k: ["".join(t) for t in itertools.product("IXYZ", repeat=k)][1:] for k in (1, 2)}


def _mul(a, b):
    """Product of ``(x, z, r)`` triples: ``i^r1 X^x1 Z^z1 * i^r2 X^x2 Z^z2``."""
    x1, z1, r1 = a
    x2, z2, r2 = b
    return x1 ^ x2, z1 ^ z2, (r1 + r2 + 2 * int(np.dot(z1, x2))) % 4


def _rref_transform(mat: np.ndarray) -> np.ndarray:
    """Invertible ``T`` with ``T @ mat`` in reduced row echelon form over GF(2)."""
    m = mat.copy() % 2
    rows = m.shape[0]
    t = np.eye(rows, dtype=np.uint8)
    r = 0
    for c in range(m.shape[1]):
        if r == rows:
            break
        hit = np.nonzero(m[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
            t[[r, p]] = t[[p, r]]
        for o in np.nonzero(m[:, c])[0]:
            if o != r:
                m[o] ^= m[r]
                t[o] ^= t[r]
        r += 1
    return t


class StabilizerMixture:
    """Diagonal mixture over the Pauli frame of a stabilizer state.

    Instances are treated as immutable; every operation returns a new object.
    """

    __slots__ = ("n_qubits", "xs", "zs", "rs", "w", "_canonical", "_qmasks")

    def __init__(self, xs: np.ndarray, zs: np.ndarray, rs: np.ndarray, w: np.ndarray,
                 canonical: bool = False):
        self.xs = np.asarray(xs, dtype=np.uint8)
        self.zs = np.asarray(zs, dtype=np.uint8)
        self.rs = np.asarray(rs, dtype=np.int64) % 4
        self.w = np.asarray(w, dtype=float)
        self.n_qubits = self.xs.shape[1]
        self._canonical = canonical
        self._qmasks = None
        if (self.xs.shape != (self.n_qubits, self.n_qubits) or self.w.ndim not in (1, 2)
                or self.w.shape[0] != 2 ** self.n_qubits):
            raise ValueError("inconsistent stabilizer mixture shapes")

    # -- construction ------------------------------------------------------
    @classmethod
    def from_stabilizers(cls, generators: Sequence[PauliString]) -> "StabilizerMixture":
        """Pure stabilizer state fixed by ``n`` independent commuting Paulis."""
        n = generators[0].n_qubits
        if len(generators) != n:
            raise ValueError("need exactly n generators")
        xs = np.array([g.x for g in generators], dtype=np.uint8)
        zs = np.array([g.z for g in generators], dtype=np.uint8)
        rs = []
        for g in generators:
            if not g.is_hermitian:
                raise ValueError(f"generator {g} is not Hermitian")
            # letters Y = i X Z contribute one factor of i each
            r = (g.letters.count("Y") + (0 if g.phase == 1 else 2)) % 4
            rs.append(r)
        w = np.zeros(2 ** n)
        w[0] = 1.0
        return cls(xs, zs, np.array(rs), w)

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerMixture":
        return cls.from_stabilizers([PauliString.single(n, q, "Z") for q in range(n)])

    def _replace(self, xs=None, zs=None, rs=None, w=None, canonical=False) -> "StabilizerMixture":
        return StabilizerMixture(self.xs if xs is None else xs, self.zs if zs is None else zs,
                                 self.rs if rs is None else rs, self.w if w is None else w,
                                 canonical=canonical)

    # -- inspection --------------------------------------------------------
    @property
    def trace(self) -> float:
        """Total weight; for batched weights the largest column total, so that
        pruning keeps a branch whenever any column still needs it."""
        if self.w.ndim == 1:
            return float(self.w.sum())
        return float(self.w.sum(axis=0).max())

    @property
    def n_columns(self) -> int:
        return 1 if self.w.ndim == 1 else self.w.shape[1]

    def column_traces(self) -> np.ndarray:
        return self.w.sum(axis=0) if self.w.ndim == 2 else np.array([self.w.sum()])

    def column(self, j: int) -> "StabilizerMixture":
        if self.w.ndim == 1:
            if j != 0:
                raise IndexError(j)
            return self
        return self._replace(w=self.w[:, j].copy(), canonical=self._canonical)

    def generator(self, i: int) -> PauliString:
        x, z, r = self.xs[i], self.zs[i], int(self.rs[i])
        n_y = int(np.sum(x & z))
        phase = 1j ** ((r - n_y) % 4)
        return PauliString.from_symplectic(x, z, phase)

    @property
    def generators(self) -> list[PauliString]:
        return [self.generator(i) for i in range(self.n_qubits)]

    def qubit_masks(self) -> tuple[list[int], list[int]]:
        """Class masks flipped by ``X_q`` and by ``Z_q`` for every qubit."""
        if self._qmasks is None:
            key = self.tableau_key()
            hit = _MASK_CACHE.get(key)
            if hit is None:
                pw = _weights_pow(self.n_qubits)
                mx = [int(v) for v in pw @ self.zs.astype(np.int64)]
                mz = [int(v) for v in pw @ self.xs.astype(np.int64)]
                hit = _cache_put(_MASK_CACHE, key, (mx, mz))
            self._qmasks = hit
        return self._qmasks

    def local_mask(self, qubits: Sequence[int], letters: str) -> int:
        mx, mz = self.qubit_masks()
        m = 0
        for q, c in zip(qubits, letters):
            if c in "XY":
                m ^= mx[q]
            if c in "ZY":
                m ^= mz[q]
        return m

    def syndrome_mask(self, p: PauliString) -> int:
        return self.local_mask(range(self.n_qubits), p.letters)

    def _perm(self, mask: int) -> np.ndarray:
        return _arange(self.n_qubits) ^ mask

    # -- branch API --------------------------------------------------------
    def scale(self, c: float) -> "StabilizerMixture":
        return self._replace(w=self.w * c, canonical=self._canonical)

    def add(self, other: "StabilizerMixture") -> "StabilizerMixture":
        if not (np.array_equal(self.xs, other.xs) and np.array_equal(self.zs, other.zs)
                and np.array_equal(self.rs, other.rs)):
            raise ValueError("cannot add mixtures over different stabilizer frames")
        return self._replace(w=self.w + other.w, canonical=self._canonical)

    def apply_pauli(self, pauli: PauliString) -> "StabilizerMixture":
        """Apply a Pauli error or correction (moves weight between classes)."""
        mask = self.syndrome_mask(pauli)
        if mask == 0:
            return self
        return self._replace(w=self.w[self._perm(mask)], canonical=self._canonical)

    def _channel(self, masks_probs: dict[int, float]) -> "StabilizerMixture":
        out = np.zeros_like(self.w)
        for mask, pr in masks_probs.items():
            if pr:
                out += pr * (self.w if mask == 0 else self.w[self._perm(mask)])
        return self._replace(w=out, canonical=self._canonical)

    def pauli_channel(self, qubits: Sequence[int], probs: dict[str, float]) -> "StabilizerMixture":
        """Pauli channel: ``probs`` maps local letter strings to probabilities."""
        acc: dict[int, float] = {0: 1.0 - sum(probs.values())}
        for letters, pr in probs.items():
            m = self.local_mask(qubits, letters)
            acc[m] = acc.get(m, 0.0) + pr
        return self._channel(acc)

    def depolarize(self, qubits: Sequence[int], p: float) -> "StabilizerMixture":
        if p == 0:
            return self
        terms = _PAULI_TERMS[len(qubits)]
        return self.pauli_channel(qubits, {t: p / len(terms) for t in terms})

    def dephase(self, qubits: Sequence[int], gamma: float) -> "StabilizerMixture":
        if gamma == 0 or not qubits:
            return self
        pz = (1 - np.sqrt(1 - gamma)) / 2
        w = self.w
        _, mz = self.qubit_masks()
        for q in qubits:
            m = mz[q]
            if m:
                w = (1 - pz) * w + pz * w[self._perm(m)]
        return self._replace(w=w, canonical=self._canonical)

    def gate(self, name: str, qubits: Sequence[int]) -> "StabilizerMixture":
        """Ideal Clifford gate; updates the reference stabilizer state."""
        name = name.upper()
        xs, zs, rs = self.xs.copy(), self.zs.copy(), self.rs.copy()
        if name in _ALL_PAULI_GATES:
            (q,) = qubits
            anti = {"X": zs[:, q], "Z": xs[:, q], "Y": xs[:, q] ^ zs[:, q]}[name]
            rs = rs + 2 * anti
        elif name == "H":
            (q,) = qubits
            a, b = xs[:, q].copy(), zs[:, q].copy()
            rs = rs + 2 * (a & b)
            xs[:, q], zs[:, q] = b, a
        elif name in ("S", "SDG"):
            (q,) = qubits
            a = xs[:, q]
            rs = rs + (1 if name == "S" else 3) * a
            zs[:, q] ^= a
        elif name == "CNOT":
            c, t = qubits
            xs[:, t] ^= xs[:, c]
            zs[:, c] ^= zs[:, t]
        elif name == "CZ":
            c, t = qubits
            ac, at = xs[:, c].copy(), xs[:, t].copy()
            rs = rs + 2 * (ac & at)
            zs[:, c] ^= at
            zs[:, t] ^= ac
        elif name == "I":
            return self
        else:
            raise ValueError(f"gate {name!r} is not a supported Clifford")
        return self._replace(xs, zs, rs, self.w)

    # -- row operations ----------------------------------------------------
    def tableau_key(self) -> bytes:
        return self.xs.tobytes() + self.zs.tobytes() + self.rs.astype(np.int8).tobytes()

    def _z_combination(self, q: int) -> np.ndarray:
        return _z_combination(self.xs, self.zs, q)

    def _isolate(self, q: int) -> tuple["StabilizerMixture", int]:
        """Rewrite the generators so that one of them is ``+-Z_q`` and no other
        generator acts on ``q``. Returns the new mixture and that generator's index."""
        xs, zs, rs, idx, k = _isolate_plan(self, q)
        w = np.zeros_like(self.w)
        w[idx] = self.w
        return StabilizerMixture(xs, zs, rs, w), k

    def measure(self, qubit: int) -> tuple["StabilizerMixture", "StabilizerMixture"]:
        """Unnormalized ``Z`` projections; requires a deterministic ideal outcome."""
        minus_mask = _measure_plan(self, qubit)
        if self.w.ndim == 2:
            minus_mask = minus_mask[:, None]
        plus = self._replace(w=np.where(minus_mask, 0.0, self.w), canonical=self._canonical)
        minus = self._replace(w=np.where(minus_mask, self.w, 0.0), canonical=self._canonical)
        return plus, minus

    def reset(self, qubit: int, p_init: float = 0.0) -> "StabilizerMixture":
        """Replace ``qubit`` by ``diag(1 - p_init, p_init)``."""
        xs, zs, rs, idx, k = _isolate_plan(self, qubit)
        n = self.n_qubits
        w = np.zeros_like(self.w)
        w[idx] = self.w
        # classes differing only in bit k become indistinguishable
        v = w.reshape(2 ** (n - k - 1), 2, 2 ** k, *w.shape[1:])
        low = v[:, 0, :] + v[:, 1, :]
        out = np.empty_like(v)
        out[:, 0, :] = (1 - p_init) * low
        out[:, 1, :] = p_init * low
        rs = rs.copy()
        rs[k] = 0
        return StabilizerMixture(xs, zs, rs, out.reshape(self.w.shape))

    def trace_out(self, qubits: Sequence[int]) -> "StabilizerMixture":
        """Partial trace over ``qubits`` (each must hold a ``Z`` eigenstate
        ideally). Remaining qubits keep their relative order."""
        s = self
        for q in sorted(qubits, reverse=True):
            s, k = s._isolate(q)
            n = s.n_qubits
            rest = s.w.shape[1:]
            w = s.w.reshape(2 ** (n - k - 1), 2, 2 ** k, *rest).sum(axis=1).reshape(-1, *rest)
            keep_rows = [i for i in range(n) if i != k]
            keep_cols = [j for j in range(n) if j != q]
            s = StabilizerMixture(s.xs[np.ix_(keep_rows, keep_cols)], s.zs[np.ix_(keep_rows, keep_cols)],
                                  s.rs[keep_rows], w)
        return s

    def canonical(self) -> "StabilizerMixture":
        """Same state with generators in reduced row echelon form."""
        if self._canonical:
            return self
        xs, zs, rs, idx = _canonical_plan(self)
        if idx is None:
            w = self.w
        else:
            w = np.zeros_like(self.w)
            w[idx] = self.w
        return StabilizerMixture(xs, zs, rs, w, canonical=True)

    def merge_key(self) -> bytes:
        c = self.canonical()
        return c.xs.tobytes() + c.zs.tobytes() + c.rs.astype(np.int8).tobytes()

    # -- conversion --------------------------------------------------------
    def destabilizers(self) -> list[PauliString]:
        """Paulis ``d_i`` anticommuting with ``g_i`` only."""
        n = self.n_qubits
        a = np.concatenate([self.zs, self.xs], axis=1)
        out = []
        for i in range(n):
            e = np.zeros(n, dtype=np.uint8)
            e[i] = 1
            v = gf2_solve(a, e)
            out.append(PauliString.from_symplectic(v[:n], v[n:]))
        return out

    def reference_vector(self) -> np.ndarray:
        """State vector of ``rho0``."""
        n = self.n_qubits
        gens = self.generators
        for seed in range(2 ** n):
            v = np.zeros(2 ** n, dtype=complex)
            v[seed] = 1
            for g in gens:
                v = 0.5 * (v + apply_to_vector(g, v))
            norm = np.linalg.norm(v)
            if norm > 1e-9:
                return v / norm
        raise RuntimeError("stabilizer projector annihilated every seed")

    def to_density_matrix(self):
        from .state import DensityMatrix

        if self.w.ndim != 1:
            raise ValueError("select a single column before converting batched weights")
        n = self.n_qubits
        psi = self.reference_vector()
        destab = self.destabilizers()
        nz = np.nonzero(self.w)[0]
        cols = []
        for b in nz:
            v = psi
            for i in range(n):
                if (b >> i) & 1:
                    v = apply_to_vector(destab[i], v)
            cols.append(v)
        if not cols:
            return DensityMatrix(n, np.zeros((2 ** n, 2 ** n), dtype=complex))
        vmat = np.array(cols).T
        m = (vmat * self.w[nz]) @ vmat.conj().T
        return DensityMatrix(n, m)

    def contains(self, p: PauliString) -> int:
        """``+1`` or ``-1`` if ``+-p`` is in the stabilizer group, else ``0``."""
        n = self.n_qubits
        a = np.concatenate([self.xs, self.zs], axis=1).T
        c = gf2_solve(a, np.concatenate([p.x, p.z]))
        if c is None:
            return 0
        acc = (np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8), 0)
        for j in np.nonzero(c)[0]:
            acc = _mul(acc, (self.xs[j], self.zs[j], int(self.rs[j])))
        r_p = (p.letters.count("Y") + {1: 0, 1j: 1, -1: 2, -1j: 3}[p.phase]) % 4
        return 1 if (acc[2] - r_p) % 4 == 0 else -1


# Tableau-level results depend only on the generators, never on the weights, and
# every branch of a protocol run walks through the same handful of tableaus.
_CACHE_LIMIT = 200_000
_MASK_CACHE: dict = {}
_ISOLATE_CACHE: dict = {}
_MEASURE_CACHE: dict = {}
_CANON_CACHE: dict = {}


def _cache_put(cache: dict, key, value):
    if len(cache) >= _CACHE_LIMIT:
        cache.clear()
    cache[key] = value
    return value


def clear_caches() -> None:
    for c in (_MASK_CACHE, _ISOLATE_CACHE, _MEASURE_CACHE, _CANON_CACHE):
        c.clear()


def _row_products(xs, zs, rs, t):
    """Generators ``prod_j g_j^{t[i, j]}`` plus the class relabelling index."""
    n = xs.shape[0]
    nx = np.zeros_like(xs)
    nz = np.zeros_like(zs)
    nr = np.zeros_like(rs)
    for i in range(n):
        acc = (np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8), 0)
        for j in np.nonzero(t[i])[0]:
            acc = _mul(acc, (xs[j], zs[j], int(rs[j])))
        nx[i], nz[i], nr[i] = acc
    bits = _index_bits(n)
    new_idx = ((bits.astype(np.int64) @ t.T.astype(np.int64)) & 1) @ _weights_pow(n)
    return nx, nz, nr, new_idx


def _z_combination(xs, zs, q):
    n = xs.shape[0]
    a = np.concatenate([xs, zs], axis=1).T
    v = np.zeros(2 * n, dtype=np.uint8)
    v[n + q] = 1
    c = gf2_solve(a, v)
    if c is None:
        raise ValueError(f"Z on qubit {q} is not in the stabilizer group; "
                         "the ideal measurement outcome is not deterministic")
    return c


def _isolate_plan(s: "StabilizerMixture", q: int):
    key = (s.tableau_key(), q)
    hit = _ISOLATE_CACHE.get(key)
    if hit is not None:
        return hit
    n = s.n_qubits
    c = _z_combination(s.xs, s.zs, q)
    k = int(np.nonzero(c)[0][-1])
    t1 = np.eye(n, dtype=np.uint8)
    t1[k] = c
    xs, zs, rs, idx = _row_products(s.xs, s.zs, s.rs, t1)
    t2 = np.eye(n, dtype=np.uint8)
    for j in range(n):
        if j != k and zs[j, q]:
            t2[j, k] = 1
    if np.any(t2 != np.eye(n, dtype=np.uint8)):
        xs, zs, rs, idx2 = _row_products(xs, zs, rs, t2)
        idx = idx2[idx]
    return _cache_put(_ISOLATE_CACHE, key, (xs, zs, rs, idx, k))


def _measure_plan(s: "StabilizerMixture", q: int) -> np.ndarray:
    """Boolean mask of classes whose ``Z_q`` outcome is 1."""
    key = (s.tableau_key(), q)
    hit = _MEASURE_CACHE.get(key)
    if hit is not None:
        return hit
    n = s.n_qubits
    c = _z_combination(s.xs, s.zs, q)
    acc = (np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8), 0)
    for j in np.nonzero(c)[0]:
        acc = _mul(acc, (s.xs[j], s.zs[j], int(s.rs[j])))
    ideal = 1 if acc[2] == 2 else 0
    par = (_index_bits(n) @ c.astype(np.int64)) & 1
    return _cache_put(_MEASURE_CACHE, key, (par ^ ideal).astype(bool))


def _canonical_plan(s: "StabilizerMixture"):
    key = s.tableau_key()
    hit = _CANON_CACHE.get(key)
    if hit is not None:
        return hit
    n = s.n_qubits
    t = _rref_transform(np.concatenate([s.xs, s.zs], axis=1))
    if np.any(t != np.eye(n, dtype=np.uint8)):
        plan = _row_products(s.xs, s.zs, s.rs, t)
    else:
        plan = (s.xs, s.zs, s.rs, None)
    return _cache_put(_CANON_CACHE, key, plan)
