"""Dense density-matrix engine.

Density matrices are stored unnormalized: the trace of a branch is the
probability of the measurement history that produced it, so the full state
is the plain sum of all branches. Qubit 0 is the most significant tensor
factor (basis index bit ``n - 1 - q``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .paulis import PauliString

__all__ = [
    "DensityMatrix",
    "StateVector",
    "GATES",
    "basis_state",
    "embed_operator",
    "apply_unitary",
    "apply_channel",
    "apply_gate",
    "depolarize",
    "dephase",
    "apply_pauli",
    "measure_z",
    "reset_qubit",
    "expectation",
    "fidelity_with_pure",
    "partial_trace",
]

_SQ2 = 1 / np.sqrt(2)

GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}


def _check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise IndexError(f"targets {targets} out of range for {n} qubits")
    return targets


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** self.n_qubits:
            raise ValueError("amplitude vector has the wrong dimension")
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise ValueError("state vector is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unnormalized density matrix; trace equals the branch probability.

    The array is made read-only, so values behave as immutable and all
    operations return new instances.
    """

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not match {self.n_qubits} qubits")
        if m.flags.writeable:
            m = m if m.base is None and m.flags.owndata else m.copy()
            m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    # -- basic properties -------------------------------------------------
    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= 0:
            raise ValueError("cannot normalize a zero-trace state")
        return DensityMatrix(self.n_qubits, self.matrix / tr)

    def check_invariants(self, psd: bool = False) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        tr = self.trace
        if tr < -1e-12 or tr > 1 + 1e-12:
            raise ValueError(f"trace {tr} outside [0, 1]")
        if psd and np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")

    # -- branch API shared with the stabilizer-mixture backend -------------
    def gate(self, name: str, qubits: Sequence[int]) -> "DensityMatrix":
        return apply_gate(self, name, qubits)

    def apply_pauli(self, pauli: PauliString) -> "DensityMatrix":
        return apply_pauli(self, pauli)

    def depolarize(self, qubits: Sequence[int], p: float) -> "DensityMatrix":
        return depolarize(self, qubits, p)

    def dephase(self, qubits: Sequence[int], gamma: float) -> "DensityMatrix":
        return dephase(self, qubits, gamma)

    def pauli_channel(self, qubits: Sequence[int], probs: dict[str, float]) -> "DensityMatrix":
        out = self.scale(1.0 - sum(probs.values()))
        for letters, pr in probs.items():
            if pr:
                full = PauliString.from_sparse(self.n_qubits, dict(zip(qubits, letters)))
                out = out.add(apply_pauli(self, full).scale(pr))
        return out

    def reset(self, qubit: int, p_init: float = 0.0) -> "DensityMatrix":
        return reset_qubit(self, qubit, p_init)

    def measure(self, qubit: int) -> tuple["DensityMatrix", "DensityMatrix"]:
        return measure_z(self, qubit)

    def scale(self, c: float) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, self.matrix * c)

    def add(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, self.matrix + other.matrix)

    def merge_key(self) -> None:
        return None

    def to_density_matrix(self) -> "DensityMatrix":
        return self


def basis_state(n_qubits: int, bits: str) -> DensityMatrix:
    """Projector onto the computational basis state ``|bits>``."""
    if len(bits) != n_qubits or any(b not in "01" for b in bits):
        raise ValueError(f"bits {bits!r} do not describe {n_qubits} qubits")
    m = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
    idx = int(bits, 2) if bits else 0
    m[idx, idx] = 1.0
    return DensityMatrix(n_qubits, m)


@lru_cache(maxsize=1024)
def _embed_cached(op_bytes: bytes, k: int, targets: tuple[int, ...], n: int) -> sp.csr_matrix:
    op = np.frombuffer(op_bytes, dtype=complex).reshape(2 ** k, 2 ** k)
    others = [q for q in range(n) if q not in targets]
    # operator on (targets, others) ordering, then permute to natural order
    full = sp.kron(sp.csr_matrix(op), sp.identity(2 ** len(others), format="csr"), format="csr")
    order = list(targets) + others
    idx = np.arange(2 ** n)
    # natural index -> index in (targets, others) ordering
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    perm = (bits[:, order] << (n - 1 - np.arange(n))).sum(axis=1)
    out = full[perm][:, perm].tocsr()
    out.sort_indices()
    return out


def embed_operator(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> sp.csr_matrix:
    """Sparse ``2^n x 2^n`` operator acting as ``op`` on ``targets``.

    ``targets[0]`` is the most significant qubit of ``op``. Results are cached
    by ``(op, targets, n)``; treat the returned matrix as read-only.
    """
    op = np.ascontiguousarray(op, dtype=complex)
    targets = _check_targets(targets, n_qubits)
    k = len(targets)
    if op.shape != (2 ** k, 2 ** k):
        raise ValueError(f"operator shape {op.shape} does not act on {k} qubits")
    return _embed_cached(op.tobytes(), k, targets, n_qubits)


def _left(t: np.ndarray, u: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``u`` into tensor axes ``axes`` of ``t``."""
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _conjugate(matrix: np.ndarray, n: int, u: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    t = matrix.reshape((2,) * (2 * n))
    t = _left(t, u, targets)
    t = _left(t, u.conj(), [n + q for q in targets])
    return t.reshape(2 ** n, 2 ** n)


def apply_unitary(rho: DensityMatrix, u: np.ndarray, targets: Sequence[int],
                  check: bool = False) -> DensityMatrix:
    """Return ``U rho U^dagger`` with ``u`` acting on ``targets``."""
    targets = _check_targets(targets, rho.n_qubits)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2 ** len(targets),) * 2:
        raise ValueError("unitary dimension does not match targets")
    if check and np.max(np.abs(u @ u.conj().T - np.eye(len(u)))) > 1e-12:
        raise ValueError("operator is not unitary")
    return DensityMatrix(rho.n_qubits, _conjugate(rho.matrix, rho.n_qubits, u, targets))


def apply_channel(rho: DensityMatrix, channel, targets: Sequence[int]) -> DensityMatrix:
    """Return ``sum_K K rho K^dagger`` for a Kraus channel on ``targets``."""
    targets = _check_targets(targets, rho.n_qubits)
    ops = channel.operators if hasattr(channel, "operators") else channel
    ops = [np.asarray(k, dtype=complex) for k in ops]
    comp = sum(k.conj().T @ k for k in ops)
    if np.max(np.abs(comp - np.eye(len(comp)))) > 1e-10:
        raise ValueError("Kraus operators are not complete")
    out = np.zeros_like(rho.matrix)
    for k in ops:
        out += _conjugate(rho.matrix, rho.n_qubits, k, targets)
    return DensityMatrix(rho.n_qubits, out)


@lru_cache(maxsize=256)
def _bit_of(n: int, q: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    return ((idx >> (n - 1 - q)) & 1).astype(bool)


@lru_cache(maxsize=256)
def _cnot_perm(n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    cbit = (idx >> (n - 1 - c)) & 1
    return idx ^ (cbit << (n - 1 - t))


def apply_gate(rho: DensityMatrix, name: str, qubits: Sequence[int]) -> DensityMatrix:
    """Apply a named gate from :data:`GATES` (CNOT takes ``(control, target)``)."""
    name = name.upper()
    if name not in GATES:
        raise ValueError(f"unknown gate {name!r}")
    qubits = _check_targets(qubits, rho.n_qubits)
    if name in "XYZ":
        return apply_pauli(rho, PauliString.from_sparse(rho.n_qubits, {qubits[0]: name}))
    if name == "CNOT":
        perm = _cnot_perm(rho.n_qubits, *qubits)
        return DensityMatrix(rho.n_qubits, rho.matrix[np.ix_(perm, perm)])
    return apply_unitary(rho, GATES[name], qubits)


@lru_cache(maxsize=4096)
def _pauli_perm_sign(n: int, xm: int, zm: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2 ** n)
    perm = idx ^ xm
    par = np.zeros(2 ** n, dtype=np.int64)
    v = perm & zm
    while np.any(v):
        par ^= v & 1
        v = v >> 1
    sign = 1.0 - 2.0 * par
    return perm, sign


def apply_pauli(rho: DensityMatrix, pauli: PauliString) -> DensityMatrix:
    """Return ``P rho P^dagger`` using an index permutation and signs."""
    if pauli.n_qubits != rho.n_qubits:
        raise ValueError("Pauli and state qubit counts differ")
    xm, zm = pauli.masks()
    if xm == 0 and zm == 0:
        return rho
    perm, sign = _pauli_perm_sign(rho.n_qubits, xm, zm)
    m = rho.matrix[np.ix_(perm, perm)] * np.outer(sign, sign)
    return DensityMatrix(rho.n_qubits, m)


def _twirl(matrix: np.ndarray, n: int, q: int) -> np.ndarray:
    """``I/2 (x) Tr_q(rho)`` placed back on qubit ``q``."""
    a, b = 2 ** q, 2 ** (n - q - 1)
    r = matrix.reshape(a, 2, b, a, 2, b)
    tr = r[:, 0, :, :, 0, :] + r[:, 1, :, :, 1, :]
    out = np.zeros_like(r)
    out[:, 0, :, :, 0, :] = tr / 2
    out[:, 1, :, :, 1, :] = tr / 2
    return out.reshape(matrix.shape)


def depolarize(rho: DensityMatrix, qubits: Sequence[int], p: float) -> DensityMatrix:
    """Uniform depolarizing channel on one or two qubits.

    Uses the twirl identity: with ``k`` qubits and ``D = 4^k``, the channel is
    ``(1 - p D/(D-1)) rho + p D/(D-1) I/2^k (x) Tr(rho)``.
    """
    qubits = _check_targets(qubits, rho.n_qubits)
    if p == 0:
        return rho
    d = 4 ** len(qubits)
    lam = p * d / (d - 1)
    tw = rho.matrix
    for q in qubits:
        tw = _twirl(tw, rho.n_qubits, q)
    return DensityMatrix(rho.n_qubits, (1 - lam) * rho.matrix + lam * tw)


@lru_cache(maxsize=128)
def _dephase_factor(n: int, mask: int, gamma: float) -> np.ndarray:
    idx = np.arange(2 ** n)
    diff = (idx[:, None] ^ idx[None, :]) & mask
    cnt = np.zeros_like(diff)
    while np.any(diff):
        cnt += diff & 1
        diff >>= 1
    return np.sqrt(1.0 - gamma) ** cnt


def dephase(rho: DensityMatrix, qubits: Sequence[int], gamma: float) -> DensityMatrix:
    """Independent phase damping with coefficient ``gamma`` on each qubit."""
    qubits = tuple(qubits)
    if gamma == 0 or not qubits:
        return rho
    n = rho.n_qubits
    mask = 0
    for q in qubits:
        mask |= 1 << (n - 1 - q)
    return DensityMatrix(n, rho.matrix * _dephase_factor(n, mask, float(gamma)))


def measure_z(rho: DensityMatrix, target: int) -> tuple[DensityMatrix, DensityMatrix]:
    """Project ``target`` onto ``|0>`` and ``|1>``; branches stay unnormalized."""
    _check_targets([target], rho.n_qubits)
    one = _bit_of(rho.n_qubits, target)
    zero = ~one
    plus = rho.matrix * np.outer(zero, zero)
    minus = rho.matrix * np.outer(one, one)
    return DensityMatrix(rho.n_qubits, plus), DensityMatrix(rho.n_qubits, minus)


def reset_qubit(rho: DensityMatrix, target: int, p_init: float = 0.0) -> DensityMatrix:
    """Trace out ``target`` and replace it with ``diag(1 - p_init, p_init)``."""
    _check_targets([target], rho.n_qubits)
    n = rho.n_qubits
    a, b = 2 ** target, 2 ** (n - target - 1)
    r = rho.matrix.reshape(a, 2, b, a, 2, b)
    tr = r[:, 0, :, :, 0, :] + r[:, 1, :, :, 1, :]
    out = np.zeros_like(r)
    out[:, 0, :, :, 0, :] = (1 - p_init) * tr
    if p_init:
        out[:, 1, :, :, 1, :] = p_init * tr
    return DensityMatrix(n, out.reshape(rho.matrix.shape))


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep`` (kept in ascending qubit order)."""
    n = rho.n_qubits
    keep = sorted(_check_targets(keep, n))
    drop = [q for q in range(n) if q not in keep]
    t = rho.matrix.reshape((2,) * (2 * n))
    for q in sorted(drop, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=cur + q)
    k = len(keep)
    return DensityMatrix(k, t.reshape(2 ** k, 2 ** k))


def expectation(rho: DensityMatrix, p: PauliString) -> float:
    """``Tr(P rho)`` for a Hermitian Pauli string."""
    if p.n_qubits != rho.n_qubits:
        raise ValueError("Pauli and state qubit counts differ")
    xm, zm = p.masks()
    idx = np.arange(rho.dim)
    par = np.zeros(rho.dim, dtype=np.int64)
    v = idx & zm
    while np.any(v):
        par ^= v & 1
        v >>= 1
    n_y = p.letters.count("Y")
    coeff = p.phase * (1j ** n_y) * (1.0 - 2.0 * par)
    # <k| P |m> = coeff[m] for k = m ^ xm
    val = np.sum(coeff * rho.matrix[idx, idx ^ xm])
    return float(np.real(val))


def fidelity_with_pure(rho: DensityMatrix, psi: StateVector) -> float:
    """``<psi| rho |psi>`` after normalizing ``rho`` to unit trace."""
    if psi.n_qubits != rho.n_qubits:
        raise ValueError("dimension mismatch")
    tr = rho.trace
    if tr <= 0:
        raise ValueError("zero-trace state")
    a = psi.amplitudes
    return float(np.real(a.conj() @ rho.matrix @ a) / tr)
