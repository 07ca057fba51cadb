"""Concurrence-family entanglement measures of pure states.

All functions take a :class:`~qentangle.states.PureState` and label qubits
from 1.  The 3-tangle comes in two independent flavours: the residual of the
monogamy relation and the Cayley hyperdeterminant, which serve as oracles for
each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from . import constants as C
from .errors import ArgumentError, NumericConsistencyError
from .states import PAULI_Y, PureState, _reduced_from_amplitudes

_YY = np.kron(PAULI_Y, PAULI_Y)


@dataclass(frozen=True)
class MeasureReport:
    pair_concurrences: dict[tuple[int, int], float]
    i_concurrences: dict[int, float]
    global_q: float
    tangle3: Optional[float] = None
    sum_sq_concurrence: float = field(default=None)

    def __post_init__(self):
        if self.sum_sq_concurrence is None:
            total = sum(c * c for c in self.pair_concurrences.values())
            object.__setattr__(self, "sum_sq_concurrence", float(total))

    def check(self, tol: float = 1e-8) -> "MeasureReport":
        """Raise if the report violates Q = mean(IC^2) or Q = 2/3 sum C^2 + tau."""
        ics = list(self.i_concurrences.values())
        q_from_ic = float(np.mean(np.square(ics)))
        if abs(q_from_ic - self.global_q) > tol:
            raise NumericConsistencyError(f"Q={self.global_q!r} but mean IC^2={q_from_ic!r}")
        if self.tangle3 is not None:
            q_from_tau = 2.0 / 3.0 * self.sum_sq_concurrence + self.tangle3
            if abs(q_from_tau - self.global_q) > tol:
                raise NumericConsistencyError(f"Q={self.global_q!r} but 2/3 sum C^2 + tau={q_from_tau!r}")
        return self

    def as_dict(self) -> dict[str, float]:
        out = {f"C{i}{j}": c for (i, j), c in sorted(self.pair_concurrences.items())}
        out.update({f"IC{i}": v for i, v in sorted(self.i_concurrences.items())})
        out["Q"] = self.global_q
        out["sum_sq_C"] = self.sum_sq_concurrence
        if self.tangle3 is not None:
            out["tangle"] = self.tangle3
        return out


def _qubit(state: PureState, q: int) -> int:
    if not 1 <= q <= state.n_qubits:
        raise ArgumentError(f"qubit {q} outside 1..{state.n_qubits}")
    return q - 1


def concurrence_from_density(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho_tilde = _YY @ rho.conj() @ _YY
    ev = np.linalg.eigvals(rho @ rho_tilde).real
    ev = np.where(ev < C.CONCURRENCE_EIG_CLIP, 0.0, ev)
    lam = np.sort(np.sqrt(ev))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_pair(state: PureState, i: int, j: int) -> float:
    a, b = _qubit(state, i), _qubit(state, j)
    if a == b:
        raise ArgumentError("concurrence needs two distinct qubits")
    a, b = sorted((a, b))
    rho = _reduced_from_amplitudes(state.amplitudes, state.n_qubits, [a, b])
    return concurrence_from_density(rho)


def _subset(state: PureState, subset_a: Iterable[int]) -> list[int]:
    axes = sorted({_qubit(state, q) for q in subset_a})
    if not axes or len(axes) == state.n_qubits:
        raise ArgumentError("i-concurrence needs a proper, nonempty subset")
    return axes


def i_concurrence(state: PureState, subset_a: Iterable[int] | int) -> float:
    """sqrt(2 (1 - Tr rho_A^2)) for the bipartition A | rest."""
    if isinstance(subset_a, (int, np.integer)):
        subset_a = [int(subset_a)]
    axes = _subset(state, subset_a)
    rho = _reduced_from_amplitudes(state.amplitudes, state.n_qubits, axes)
    p = float(np.sum(np.abs(rho) ** 2))
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - p))))


def single_qubit_purities(state: PureState) -> np.ndarray:
    n = state.n_qubits
    t = state.tensor()
    out = np.empty(n)
    for k in range(n):
        m = np.moveaxis(t, k, 0).reshape(2, -1)
        rho = m @ m.conj().T
        out[k] = np.sum(np.abs(rho) ** 2)
    return out


def global_entanglement(state: PureState) -> float:
    """Meyer-Wallach Q = 2 (1 - mean_k Tr rho_k^2)."""
    if state.n_qubits < 2:
        raise ArgumentError("global entanglement needs at least two qubits")
    q = 2.0 * (1.0 - single_qubit_purities(state).mean())
    return float(min(1.0, max(0.0, q)))


def _require_three(state: PureState) -> None:
    if state.n_qubits != 3:
        raise ArgumentError(f"3-tangle is defined for 3 qubits, got {state.n_qubits}")


def tangle3_residual(state: PureState) -> float:
    """tau = IC_1^2 - C_12^2 - C_13^2, clamped at small negative noise."""
    _require_three(state)
    ic1 = i_concurrence(state, [1])
    tau = ic1**2 - concurrence_pair(state, 1, 2) ** 2 - concurrence_pair(state, 1, 3) ** 2
    if tau < -C.TANGLE_CLAMP:
        raise NumericConsistencyError(f"negative residual tangle {tau!r}")
    return float(min(1.0, max(0.0, tau)))


def tangle3_oracle(state: PureState) -> float:
    """Coffman-Kundu-Wootters tangle, 4 |hyperdeterminant|, from the amplitudes."""
    _require_three(state)
    a = state.tensor()
    d1 = (
        a[0, 0, 0] ** 2 * a[1, 1, 1] ** 2
        + a[0, 0, 1] ** 2 * a[1, 1, 0] ** 2
        + a[0, 1, 0] ** 2 * a[1, 0, 1] ** 2
        + a[1, 0, 0] ** 2 * a[0, 1, 1] ** 2
    )
    d2 = (
        a[0, 0, 0] * a[1, 1, 1] * a[0, 1, 1] * a[1, 0, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 1, 0] * a[0, 0, 1]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 1, 0] * a[0, 0, 1]
        + a[1, 0, 1] * a[0, 1, 0] * a[1, 1, 0] * a[0, 0, 1]
    )
    d3 = a[0, 0, 0] * a[1, 1, 0] * a[1, 0, 1] * a[0, 1, 1] + a[1, 1, 1] * a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0]
    return float(min(1.0, 4.0 * abs(d1 - 2.0 * d2 + 4.0 * d3)))


def sum_sq_concurrences(state: PureState) -> float:
    n = state.n_qubits
    return float(sum(concurrence_pair(state, i, j) ** 2 for i, j in combinations(range(1, n + 1), 2)))


def measure_report(state: PureState) -> MeasureReport:
    n = state.n_qubits
    pairs = {(i, j): concurrence_pair(state, i, j) for i, j in combinations(range(1, n + 1), 2)}
    ics = {k: i_concurrence(state, [k]) for k in range(1, n + 1)}
    return MeasureReport(
        pair_concurrences=pairs,
        i_concurrences=ics,
        global_q=global_entanglement(state),
        tangle3=tangle3_residual(state) if n == 3 else None,
    )
