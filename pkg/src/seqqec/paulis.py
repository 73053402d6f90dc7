"""Pauli strings and their symplectic representation.

Qubit ordering is global to the package: qubit 0 is the most significant
tensor factor, so basis index ``j`` has qubit ``q`` in bit ``n - 1 - q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

_LETTERS = "IXYZ"

# single-qubit products: (a, b) -> (phase, letter) with a*b = phase * letter
_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_VALID_PHASES = (1, -1, 1j, -1j)


def _clean_phase(phase: complex) -> complex:
    for p in _VALID_PHASES:
        if abs(phase - p) < 1e-9:
            return p
    raise ValueError(f"phase must be one of +-1, +-i, got {phase!r}")


@dataclass(frozen=True)
class PauliString:
    """A phased tensor product of single-qubit Paulis.

    ``letters[q]`` acts on qubit ``q``. ``phase`` is one of ``+1, -1, +1j, -1j``.
    """

    letters: str
    phase: complex = 1

    def __post_init__(self):
        if any(c not in _LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", _clean_phase(self.phase))

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        """Parse ``"XZZXI"``, ``"-XZZXI"``, ``"+iYY"`` or ``"-iZ"``."""
        text = text.strip()
        phase: complex = 1
        if text.startswith(("+", "-")):
            phase = -1 if text[0] == "-" else 1
            text = text[1:]
        if text.startswith("i"):
            phase *= 1j
            text = text[1:]
        return cls(text, phase)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        return cls.from_sparse(n, {qubit: letter})

    @classmethod
    def from_sparse(cls, n: int, ops: Mapping[int, str], phase: complex = 1) -> "PauliString":
        letters = ["I"] * n
        for q, c in ops.items():
            letters[q] = c
        return cls("".join(letters), phase)

    @classmethod
    def from_symplectic(cls, x: Iterable[int], z: Iterable[int], phase: complex = 1) -> "PauliString":
        letters = "".join({(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[(int(a), int(b))]
                          for a, b in zip(x, z))
        return cls(letters, phase)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    @property
    def x(self) -> np.ndarray:
        return np.array([c in "XY" for c in self.letters], dtype=np.uint8)

    @property
    def z(self) -> np.ndarray:
        return np.array([c in "ZY" for c in self.letters], dtype=np.uint8)

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (1, -1)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        phase = self.phase * other.phase
        out = []
        for a, b in zip(self.letters, other.letters):
            ph, c = _MUL[(a, b)]
            phase *= ph
            out.append(c)
        return PauliString("".join(out), phase)

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, -self.phase)

    def scaled(self, phase: complex) -> "PauliString":
        return PauliString(self.letters, self.phase * phase)

    def unsigned(self) -> "PauliString":
        return PauliString(self.letters)

    def commutes(self, other: "PauliString") -> bool:
        anti = sum(a != "I" and b != "I" and a != b for a, b in zip(self.letters, other.letters))
        return anti % 2 == 0

    def restricted(self, qubits: Iterable[int]) -> "PauliString":
        return PauliString("".join(self.letters[q] for q in qubits))

    def to_matrix(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix (qubit 0 most significant)."""
        m = np.array([[1.0 + 0j]])
        for c in self.letters:
            m = np.kron(m, PAULI_MATRICES[c])
        return self.phase * m

    def masks(self) -> tuple[int, int]:
        """Integer bit masks ``(x_mask, z_mask)`` over basis indices."""
        return _masks(self.letters)

    def __str__(self) -> str:
        prefix = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return prefix + self.letters


@lru_cache(maxsize=4096)
def _masks(letters: str) -> tuple[int, int]:
    n = len(letters)
    xm = zm = 0
    for q, c in enumerate(letters):
        bit = 1 << (n - 1 - q)
        if c in "XY":
            xm |= bit
        if c in "ZY":
            zm |= bit
    return xm, zm


def symplectic_matrix(paulis: Iterable[PauliString]) -> np.ndarray:
    """Stack Paulis as rows ``[x | z]`` over GF(2)."""
    rows = [np.concatenate([p.x, p.z]) for p in paulis]
    return np.array(rows, dtype=np.uint8)


def anticommutation_bits(p: PauliString, others: Iterable[PauliString]) -> tuple[int, ...]:
    return tuple(0 if p.commutes(o) else 1 for o in others)


def all_paulis(n: int, include_identity: bool = False) -> list[PauliString]:
    """Every unsigned n-qubit Pauli in lexicographic order over ``IXYZ``."""
    import itertools

    out = [PauliString("".join(t)) for t in itertools.product(_LETTERS, repeat=n)]
    return out if include_identity else out[1:]


def gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve ``a @ x = b`` over GF(2); return one solution or ``None``."""
    a = np.array(a, dtype=np.uint8) % 2
    b = np.array(b, dtype=np.uint8) % 2
    rows, cols = a.shape
    m = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        hit = np.nonzero(m[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.nonzero(m[:, c])[0]
        for o in others:
            if o != r:
                m[o] ^= m[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if np.any(m[r:, -1]):
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = m[i, -1]
    return x


def gf2_rank(a: np.ndarray) -> int:
    m = np.array(a, dtype=np.uint8) % 2
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        hit = np.nonzero(m[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        m[[r, p]] = m[[p, r]]
        for o in np.nonzero(m[:, c])[0]:
            if o != r:
                m[o] ^= m[r]
        r += 1
        if r == rows:
            break
    return r


def apply_to_vector(p: PauliString, v: np.ndarray) -> np.ndarray:
    """Return ``P |v>`` for a state vector ``v`` over ``p.n_qubits`` qubits."""
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
    return coeff * np.asarray(v)[src]
