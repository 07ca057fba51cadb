"""Pure states, density matrices and observables for a handful of qubits.

Basis ordering puts qubit 1 on the most significant bit, so ``|011>`` is
index 3 with qubit 1 in ``|0>``.  Qubits are labelled from 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from . import constants as C
from .errors import (
    ArgumentError,
    DegenerateSuperpositionError,
    NumericConsistencyError,
    SizeError,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _qubits_for_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise SizeError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        n = _qubits_for_dim(amp.size)
        if n > C.MAX_QUBITS:
            raise SizeError(f"{n} qubits exceeds the supported maximum of {C.MAX_QUBITS}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > C.NORM_TOL:
            raise ArgumentError(f"state is not normalized (norm={norm!r}); use PureState.normalized")
        object.__setattr__(self, "amplitudes", _frozen(amp))
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def normalized(cls, vector: Sequence[complex]) -> "PureState":
        v = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm <= C.DEGENERATE_NORM:
            raise DegenerateSuperpositionError("cannot normalize a zero vector")
        return cls(v / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length 2 per qubit."""
        return self.amplitudes.reshape([2] * self.n_qubits)

    def __len__(self) -> int:
        return self.dim


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    subsystem_labels: tuple[int, ...] = ()
    dim: int = field(init=False)

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise SizeError("density matrix must be square")
        n = _qubits_for_dim(rho.shape[0])
        labels = tuple(self.subsystem_labels) or tuple(range(1, n + 1))
        if len(labels) != n:
            raise SizeError(f"{len(labels)} labels for a {n}-qubit matrix")
        if np.abs(rho - rho.conj().T).max() > C.HERMITIAN_TOL:
            raise NumericConsistencyError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > C.TRACE_TOL:
            raise NumericConsistencyError(f"density matrix trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho).min() < C.EIGEN_FLOOR:
            raise NumericConsistencyError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", _frozen(rho))
        object.__setattr__(self, "subsystem_labels", labels)
        object.__setattr__(self, "dim", rho.shape[0])


@dataclass(frozen=True)
class Observable:
    entries: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        op = np.asarray(self.entries, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise SizeError("observable must be square")
        _qubits_for_dim(op.shape[0])
        if np.abs(op - op.conj().T).max() > C.OBSERVABLE_TOL:
            raise NumericConsistencyError("observable is not Hermitian")
        object.__setattr__(self, "entries", _frozen(op))
        object.__setattr__(self, "dim", op.shape[0])

    def __matmul__(self, other):
        return self.entries @ (other.entries if isinstance(other, Observable) else other)


def ket_basis(bits: Sequence[int] | str) -> PureState:
    bits = [int(b) for b in bits]
    if not 1 <= len(bits) <= C.MAX_QUBITS:
        raise SizeError(f"bit list of length {len(bits)} outside [1, {C.MAX_QUBITS}]")
    if any(b not in (0, 1) for b in bits):
        raise ArgumentError(f"bits must be 0 or 1, got {bits}")
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(map(str, bits)), 2)] = 1.0
    return PureState(v)


def superpose(terms: Iterable[tuple[complex, PureState]]) -> PureState:
    """Normalized linear combination of states with equal qubit count."""
    terms = list(terms)
    if not terms:
        raise ArgumentError("superposition needs at least one term")
    n = terms[0][1].n_qubits
    acc = np.zeros(2**n, dtype=complex)
    for coeff, state in terms:
        if state.n_qubits != n:
            raise SizeError("all superposed states must have the same number of qubits")
        acc = acc + complex(coeff) * state.amplitudes
    if np.linalg.norm(acc) <= C.DEGENERATE_NORM:
        raise DegenerateSuperpositionError("superposition vanishes")
    return PureState.normalized(acc)


def product_state(*states: PureState) -> PureState:
    return PureState.normalized(reduce(np.kron, [s.amplitudes for s in states]))


def ghz_state(n: int = 3) -> PureState:
    return superpose([(1, ket_basis([0] * n)), (1, ket_basis([1] * n))])


def generalized_ghz(g: float, n: int = 3) -> PureState:
    """g|0...0> + sqrt(1 - g^2)|1...1> for 0 <= g <= 1."""
    if not 0.0 <= g <= 1.0:
        raise ArgumentError(f"g must lie in [0, 1], got {g!r}")
    return superpose([(g, ket_basis([0] * n)), (np.sqrt(1.0 - g * g), ket_basis([1] * n))])


def w_state(n: int = 3) -> PureState:
    return superpose([(1, ket_basis([int(i == k) for i in range(n)])) for k in range(n)])


def density(state: PureState) -> DensityMatrix:
    a = state.amplitudes
    return DensityMatrix(np.outer(a, a.conj()))


def _reduced_from_amplitudes(amp: np.ndarray, n: int, keep: Sequence[int]) -> np.ndarray:
    # keep holds 0-based axes in output order
    t = amp.reshape([2] * n)
    rest = [k for k in range(n) if k not in keep]
    m = np.transpose(t, list(keep) + rest).reshape(2 ** len(keep), -1)
    return m @ m.conj().T


def reduced_density(state: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix of a pure state on the (1-based) qubits in ``keep``."""
    labels = _check_keep(range(1, state.n_qubits + 1), keep)
    rho = _reduced_from_amplitudes(state.amplitudes, state.n_qubits, [q - 1 for q in labels])
    return DensityMatrix(rho, labels)


def _check_keep(available: Iterable[int], keep: Iterable[int]) -> tuple[int, ...]:
    available = tuple(available)
    keep = set(keep)
    if not keep:
        raise ArgumentError("keep set is empty")
    unknown = keep - set(available)
    if unknown:
        raise ArgumentError(f"unknown qubit labels {sorted(unknown)}; available {available}")
    return tuple(q for q in available if q in keep)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    labels = _check_keep(rho.subsystem_labels, keep)
    n = len(rho.subsystem_labels)
    keep_axes = [rho.subsystem_labels.index(q) for q in labels]
    t = rho.entries.reshape([2] * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for k in range(n):
        if k not in keep_axes:
            col[k] = row[k]
    out = "".join(row[k] for k in keep_axes) + "".join(col[k] for k in keep_axes)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = 2 ** len(labels)
    return DensityMatrix(red.reshape(d, d), labels)


def purity(rho: DensityMatrix | np.ndarray) -> float:
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def expectation(state: PureState, op: Observable | np.ndarray) -> float:
    m = op.entries if isinstance(op, Observable) else np.asarray(op)
    if m.shape != (state.dim, state.dim):
        raise SizeError(f"operator of shape {m.shape} does not act on a {state.n_qubits}-qubit state")
    a = state.amplitudes
    val = np.vdot(a, m @ a)
    if abs(val.imag) > C.IMAG_TOL:
        raise NumericConsistencyError(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)


def random_state(n: int, seed: int) -> PureState:
    """Haar-distributed pure state (normalized complex Gaussian vector)."""
    _check_count(n)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return PureState.normalized(v)


def random_product_state(n: int, seed: int) -> PureState:
    _check_count(n)
    rng = np.random.default_rng(seed)
    singles = []
    for _ in range(n):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        singles.append(PureState.normalized(v))
    return product_state(*singles)


def _check_count(n: int) -> None:
    if not 1 <= n <= C.MAX_QUBITS:
        raise SizeError(f"qubit count {n} outside [1, {C.MAX_QUBITS}]")


def canonical_phase(state: PureState, tol: float = 1e-9) -> PureState:
    """Fix the global phase so the largest-magnitude amplitude is real positive.

    Ties within ``tol`` resolve to the lowest basis index.
    """
    a = state.amplitudes
    mag = np.abs(a)
    idx = int(np.flatnonzero(mag >= mag.max() - tol)[0])
    phase = a[idx] / mag[idx]
    return PureState(a / phase)


def operator_on(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Kronecker product placing 2x2 ``ops[q]`` on 1-based qubit q, identity elsewhere."""
    return reduce(np.kron, [ops.get(q, IDENTITY2) for q in range(1, n + 1)])


def correlation_tensor(state: PureState) -> np.ndarray:
    """Real tensor T[i1..in] = <psi| sigma_i1 x ... x sigma_in |psi>, indices over (x, y, z)."""
    n = state.n_qubits
    t = state.tensor()
    for k in range(n):
        # apply the Pauli triple on spin axis k; its index is appended at the end
        t = np.moveaxis(np.tensordot(PAULIS, t, axes=([2], [k])), 1, k + 1)
        t = np.moveaxis(t, 0, -1)
    spin = list(range(n))
    out = np.tensordot(state.tensor().conj(), t, axes=(spin, spin))
    return np.ascontiguousarray(out.real)
