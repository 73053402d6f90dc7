"""The three distance-3 codes, their decoders and a noiseless correction step."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .paulis import PauliString, apply_to_vector
from .state import DensityMatrix, StateVector, apply_pauli

BASIS_LABELS = ("0", "1", "+", "-", "+i", "-i")


def syndrome_of(p: PauliString, generators: Sequence[PauliString]) -> tuple[int, ...]:
    return tuple(0 if p.commutes(g) else 1 for g in generators)


def errors_by_weight(n: int, max_weight: int | None = None) -> Iterator[PauliString]:
    """Pauli errors ordered by weight, then lexicographically by (qubit, X<Y<Z)."""
    top = n if max_weight is None else max_weight
    for w in range(top + 1):
        for qubits in itertools.combinations(range(n), w):
            for letters in itertools.product("XYZ", repeat=w):
                yield PauliString.from_sparse(n, dict(zip(qubits, letters)))


def _is_css(generators: Sequence[PauliString]) -> bool:
    return all(len(set(g.letters) - {"I"}) == 1 for g in generators)


def _single_type_table(n: int, generators: Sequence[PauliString], letter: str) -> dict:
    """Minimum-weight ``letter``-type error for every syndrome of ``generators``."""
    table: dict = {}
    target = 2 ** len(generators)
    for w in range(n + 1):
        for qubits in itertools.combinations(range(n), w):
            e = PauliString.from_sparse(n, {q: letter for q in qubits})
            table.setdefault(syndrome_of(e, generators), e)
            if len(table) == target:
                return table
    return table


def build_lookup_table(n: int, generators: Sequence[PauliString],
                       per_type: bool = False) -> dict[tuple[int, ...], PauliString]:
    """Minimum-weight decoder covering every reachable syndrome.

    By default errors are enumerated jointly (``Y`` has weight one). With
    ``per_type`` a CSS generator set is decoded one Pauli type at a time: the
    X part of the correction comes from the Z-type checks alone and vice
    versa, each part minimum weight with lexicographic ties.
    """
    if per_type:
        if not _is_css(generators):
            raise ValueError("per-type decoding needs X-type and Z-type generators only")
        z_idx = [i for i, g in enumerate(generators) if "Z" in g.letters]
        x_idx = [i for i, g in enumerate(generators) if "X" in g.letters]
        tx = _single_type_table(n, [generators[i] for i in z_idx], "X")
        tz = _single_type_table(n, [generators[i] for i in x_idx], "Z")
        table = {}
        for s in itertools.product((0, 1), repeat=len(generators)):
            cx = tx[tuple(s[i] for i in z_idx)]
            cz = tz[tuple(s[i] for i in x_idx)]
            table[s] = PauliString.from_symplectic(cx.x, cz.z).unsigned()
        return table
    table: dict[tuple[int, ...], PauliString] = {}
    target = 2 ** len(generators)
    for e in errors_by_weight(n):
        s = syndrome_of(e, generators)
        if s not in table:
            table[s] = e
            if len(table) == target:
                break
    return table


def stabilizer_group(generators: Sequence[PauliString]) -> list[PauliString]:
    n = generators[0].n_qubits
    group = []
    for bits in itertools.product((0, 1), repeat=len(generators)):
        p = PauliString.identity(n)
        for b, g in zip(bits, generators):
            if b:
                p = p * g
        group.append(p)
    return group


def _lex_key(p: PauliString) -> tuple:
    return (p.weight, tuple((q, "XYZ".index(c)) for q, c in enumerate(p.letters) if c != "I"))


def min_weight_representative(op: PauliString, generators: Sequence[PauliString]) -> PauliString:
    """Lowest-weight element of ``op`` times the stabilizer group (phase kept)."""
    return min((op * s for s in stabilizer_group(generators)), key=_lex_key)


@dataclass(frozen=True)
class StabilizerCode:
    """An ``[[n, 1, 3]]`` stabilizer code with a lookup-table decoder.

    ``check_types`` labels each generator ``"X"``, ``"Z"`` or ``"mixed"``.
    """

    name: str
    n: int
    generators: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    logical_y: PauliString
    k: int = 1
    d: int = 3
    per_type_decoding: bool = False
    lookup_table: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.lookup_table is None:
            table = build_lookup_table(self.n, self.generators, self.per_type_decoding)
            object.__setattr__(self, "lookup_table", table)
        self.validate()

    def validate(self) -> None:
        gens = self.generators
        if len(gens) != self.n - self.k:
            raise ValueError("wrong number of generators")
        for a, b in itertools.combinations(gens, 2):
            if not a.commutes(b):
                raise ValueError(f"generators {a} and {b} anticommute")
        for lop in (self.logical_x, self.logical_y, self.logical_z):
            if not lop.is_hermitian or any(not lop.commutes(g) for g in gens):
                raise ValueError(f"{lop} is not a valid logical operator")
        if self.logical_x.commutes(self.logical_z):
            raise ValueError("logical X and Z commute")

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    @property
    def check_types(self) -> tuple[str, ...]:
        out = []
        for g in self.generators:
            letters = set(g.letters) - {"I"}
            out.append(letters.pop() if len(letters) == 1 else "mixed")
        return tuple(out)

    def logical(self, axis: str) -> PauliString:
        return {"X": self.logical_x, "Y": self.logical_y, "Z": self.logical_z}[axis]

    def syndrome(self, p: PauliString) -> tuple[int, ...]:
        return syndrome_of(p, self.generators)

    def correction(self, syndrome: Sequence[int]) -> PauliString:
        return self.lookup_table[tuple(int(b) for b in syndrome)]

    def decode_is_logical_error(self, error: PauliString, logical: PauliString) -> bool:
        """True if ``error`` followed by lookup correction flips ``logical``."""
        residual = self.correction(self.syndrome(error)) * error
        return not residual.commutes(logical)

    def lookup_table_text(self) -> str:
        """Audit format: one ``syndrome-bits -> Pauli`` line per syndrome."""
        lines = [f"# {self.name} lookup table: syndrome bits -> correction"]
        for s in sorted(self.lookup_table):
            lines.append(f"{''.join(map(str, s))} -> {self.lookup_table[s].letters}")
        return "\n".join(lines) + "\n"


def _with_logicals(name: str, gens: Sequence[str], lx: str, lz: str, search: bool,
                   per_type: bool = False) -> StabilizerCode:
    gens = tuple(PauliString.from_str(g) for g in gens)
    x, z = PauliString.from_str(lx), PauliString.from_str(lz)
    if search:
        x = min_weight_representative(x, gens)
        z = min_weight_representative(z, gens)
    y = min_weight_representative((x * z).scaled(1j), gens)
    return StabilizerCode(name=name, n=len(gens[0].letters), generators=gens,
                          logical_x=x, logical_z=z, logical_y=y, per_type_decoding=per_type)


@lru_cache(maxsize=None)
def five_one_three() -> StabilizerCode:
    gens = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
    return _with_logicals("513", gens, "XXXXX", "ZZZZZ", search=True)


HAMMING_ROWS = ("0001111", "0110011", "1010101")


@lru_cache(maxsize=None)
def steane() -> StabilizerCode:
    z_checks = ["".join("Z" if b == "1" else "I" for b in row) for row in HAMMING_ROWS]
    x_checks = ["".join("X" if b == "1" else "I" for b in row) for row in HAMMING_ROWS]
    return _with_logicals("steane", z_checks + x_checks, "XXXXXXX", "ZZZZZZZ", search=True)


# 3x3 grid, qubit = 3*row + col
SURFACE9_CHECKS = {
    "Z": ((1, 2, 4, 5), (3, 4, 6, 7), (0, 1), (7, 8)),
    "X": ((0, 1, 3, 4), (4, 5, 7, 8), (2, 5), (3, 6)),
}


@lru_cache(maxsize=None)
def surface9() -> StabilizerCode:
    gens = []
    for kind in ("Z", "X"):
        for support in SURFACE9_CHECKS[kind]:
            gens.append(PauliString.from_sparse(9, {q: kind for q in support}).letters)
    # The joint table decodes some X_a Z_b pairs, which a single CNOT fault in
    # the last X-type check leaves behind, to a logically wrong weight-2 error.
    return _with_logicals("surface9", gens, "XXXIIIIII", "ZIIZIIZII", search=False, per_type=True)


CODES = {"513": five_one_three, "steane": steane, "surface9": surface9}


def get_code(name: str) -> StabilizerCode:
    key = str(name).lower()
    if key not in CODES:
        raise ValueError(f"unknown code {name!r}; expected one of {sorted(CODES)}")
    return CODES[key]()


@dataclass(frozen=True)
class LogicalBasis:
    code: StabilizerCode
    states: dict

    def __getitem__(self, label: str) -> StateVector:
        return self.states[label]


def _project(v: np.ndarray, ops: Sequence[PauliString]) -> np.ndarray:
    for op in ops:
        v = 0.5 * (v + apply_to_vector(op, v))
    return v


@lru_cache(maxsize=None)
def _logical_basis(name: str) -> LogicalBasis:
    code = get_code(name)
    dim = 2 ** code.n
    ops = list(code.generators) + [code.logical_z]
    zero = None
    for seed in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[seed] = 1
        v = _project(v, ops)
        if np.linalg.norm(v) > 1e-9:
            zero = v / np.linalg.norm(v)
            break
    if zero is None:
        raise RuntimeError("codespace projector annihilated every seed state")
    one = apply_to_vector(code.logical_x, zero)
    r = 1 / np.sqrt(2)
    vecs = {"0": zero, "1": one, "+": r * (zero + one), "-": r * (zero - one),
            "+i": r * (zero + 1j * one), "-i": r * (zero - 1j * one)}
    return LogicalBasis(code, {k: StateVector(code.n, v) for k, v in vecs.items()})


def logical_basis(code: StabilizerCode) -> LogicalBasis:
    return _logical_basis(code.name)


# axis of the Bloch vector and its sign for each basis label
LABEL_AXIS = {"0": ("Z", 1), "1": ("Z", -1), "+": ("X", 1), "-": ("X", -1),
              "+i": ("Y", 1), "-i": ("Y", -1)}


def _pauli_left(m: np.ndarray, p: PauliString) -> np.ndarray:
    n = p.n_qubits
    xm, zm = p.masks()
    idx = np.arange(2 ** n)
    src = idx ^ xm
    par = np.zeros(2 ** n, dtype=np.int64)
    w = src & zm
    while np.any(w):
        par ^= w & 1
        w >>= 1
    coeff = p.phase * (1j ** p.letters.count("Y")) * (1.0 - 2.0 * par)
    return coeff[:, None] * m[src, :]


def perfect_ec(rho: DensityMatrix, code: StabilizerCode) -> DensityMatrix:
    """Noiseless syndrome projection followed by lookup-table correction."""
    if rho.n_qubits != code.n:
        raise ValueError("perfect_ec expects a state on the data qubits only")
    leaves = [((), rho.matrix)]
    for g in code.generators:
        nxt = []
        for bits, m in leaves:
            gm = _pauli_left(m, g)
            gmg = _pauli_left(gm.conj().T, g).conj().T  # (G rho) G
            cross = gm + gm.conj().T
            plus = 0.25 * (m + cross + gmg)
            minus = 0.25 * (m - cross + gmg)
            nxt.append((bits + (0,), plus))
            nxt.append((bits + (1,), minus))
        leaves = nxt
    out = np.zeros_like(rho.matrix)
    for bits, m in leaves:
        if not np.any(m):
            continue
        out += apply_pauli(DensityMatrix(code.n, m), code.correction(bits)).matrix
    return DensityMatrix(code.n, out)
