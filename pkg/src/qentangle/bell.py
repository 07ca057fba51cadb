"""Mermin-Klyshko operators F_n, F'_n for three and four qubits.

The dense builders are the reference definition.  :func:`mk_values`
evaluates the same polynomials from a state's correlation tensor and is what
the optimizer calls in its inner loop; tests keep the two in agreement.

Writing u_k = v_k + i v'_k for qubits 1..3 the polynomials satisfy
F_3 = Im P and F'_3 = -Re P with P = <(A + iA')(B + iB')(C + iC')>.  The
fourth qubit enters F_4 through u_4 = ((d + d') + i(d' - d)) / 2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import constants as C
from .errors import ArgumentError, NormalizationError
from .states import PAULIS, Observable, PureState, correlation_tensor, expectation, operator_on


@dataclass(frozen=True)
class Direction:
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = np.sqrt(self.x**2 + self.y**2 + self.z**2)
        if abs(norm - 1.0) > 1e-10:
            raise NormalizationError(f"direction ({self.x}, {self.y}, {self.z}) has norm {norm!r}")

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "Direction":
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise NormalizationError("zero vector has no direction")
        x, y, z = v / norm
        return cls(float(x), float(y), float(z))

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "Direction":
        st = np.sin(theta)
        return cls.from_vector([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class BellSettings:
    """One (unprimed, primed) direction pair per qubit, qubit 1 first."""

    pairs: tuple[tuple[Direction, Direction], ...]

    def __post_init__(self):
        pairs = tuple((p[0], p[1]) for p in self.pairs)
        if len(pairs) not in (3, 4):
            raise ArgumentError(f"Bell settings need 3 or 4 qubit pairs, got {len(pairs)}")
        for v, vp in pairs:
            if not (isinstance(v, Direction) and isinstance(vp, Direction)):
                raise ArgumentError("settings entries must be Direction instances")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return len(self.pairs)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BellSettings":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 3 or arr.shape[1:] != (2, 3):
            raise ArgumentError(f"settings array must have shape (n, 2, 3), got {arr.shape}")
        return cls(tuple((Direction.from_vector(a[0]), Direction.from_vector(a[1])) for a in arr))

    def as_array(self) -> np.ndarray:
        return np.array([[v.as_array(), vp.as_array()] for v, vp in self.pairs])

    def rows(self) -> list[tuple[str, float, float, float]]:
        """(label, x, y, z) per vector: A, A', B, B', ..."""
        out = []
        for k, (v, vp) in enumerate(self.pairs):
            name = "ABCD"[k]
            out.append((name, v.x, v.y, v.z))
            out.append((name + "'", vp.x, vp.y, vp.z))
        return out


class Classification(enum.Enum):
    ProductCompatible = "ProductCompatible"
    TwoQubitCompatible = "TwoQubitCompatible"
    ThreeQubitCompatible = "ThreeQubitCompatible"
    FourQubitCompatible = "FourQubitCompatible"
    BeyondBound = "BeyondBound"


def spin_observable(v: Direction | Sequence[float]) -> Observable:
    """v . sigma as a 2x2 observable."""
    arr = v.as_array() if isinstance(v, Direction) else np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ArgumentError("direction must have three components")
    if abs(np.linalg.norm(arr) - 1.0) > C.DIRECTION_TOL:
        raise NormalizationError(f"direction {arr} is not a unit vector")
    return Observable(np.tensordot(arr, PAULIS, axes=1))


def _check_arity(s: BellSettings, n: int, what: str) -> None:
    if s.n != n:
        raise ArgumentError(f"{what} needs {n} qubit pairs, got {s.n}")


def _local_ops(s: BellSettings, n_total: int):
    ops = []
    for q, (v, vp) in enumerate(s.pairs[:3], start=1):
        ops.append(
            (
                operator_on({q: spin_observable(v).entries}, n_total),
                operator_on({q: spin_observable(vp).entries}, n_total),
            )
        )
    return ops


def _f3_pair(s: BellSettings, n_total: int) -> tuple[np.ndarray, np.ndarray]:
    (A, Ap), (B, Bp), (Cc, Cp) = _local_ops(s, n_total)
    s1 = A @ Bp + Ap @ B
    s2 = A @ B - Ap @ Bp
    return s1 @ Cc + s2 @ Cp, s1 @ Cp - s2 @ Cc


def build_f3(s: BellSettings) -> Observable:
    _check_arity(s, 3, "F3")
    return Observable(_f3_pair(s, 3)[0])


def build_f3_prime(s: BellSettings) -> Observable:
    _check_arity(s, 3, "F3'")
    return Observable(_f3_pair(s, 3)[1])


def _f4_pair(s: BellSettings) -> tuple[np.ndarray, np.ndarray]:
    _check_arity(s, 4, "F4")
    f3, f3p = _f3_pair(s, 4)
    d, dp = s.pairs[3]
    D = operator_on({4: spin_observable(d).entries}, 4)
    Dp = operator_on({4: spin_observable(dp).entries}, 4)
    # D acts on qubit 4, so the products commute with the F3 factors
    f4 = 0.5 * (D + Dp) @ f3 + 0.5 * (D - Dp) @ f3p
    f4p = 0.5 * (D + Dp) @ f3p + 0.5 * (Dp - D) @ f3
    return f4, f4p


def build_f4(s: BellSettings) -> Observable:
    return Observable(_f4_pair(s)[0])


def build_f4_prime(s: BellSettings) -> Observable:
    return Observable(_f4_pair(s)[1])


def build_pair(s: BellSettings) -> tuple[Observable, Observable]:
    """(F_n, F'_n) for n = number of qubit pairs in ``s``."""
    f, fp = _f3_pair(s, 3) if s.n == 3 else _f4_pair(s)
    return Observable(f), Observable(fp)


def bound_f(n: int) -> float:
    """Largest quantum value of |<F_n>|."""
    return 2.0 ** ((n + 1) / 2)


def classify(sum_sq: float, n: int) -> Classification:
    """Place <F>^2 + <F'>^2 on the bound ladder 8 / 16 (/ 32); boundaries are inclusive."""
    if n not in (3, 4):
        raise ArgumentError(f"classification is defined for 3 or 4 qubits, got {n}")
    if not sum_sq >= 0:
        raise ArgumentError(f"negative squared sum {sum_sq!r}")
    ladder = [(8.0, Classification.TwoQubitCompatible), (16.0, Classification.ThreeQubitCompatible)]
    if n == 4:
        ladder.append((32.0, Classification.FourQubitCompatible))
    for bound, label in ladder:
        if sum_sq <= bound:
            return label
    return Classification.BeyondBound


def classify_values(value_f: float, value_fprime: float, n: int) -> Classification:
    """Like :func:`classify`, but reports product compatibility when max(|F|, |F'|) <= 2."""
    if max(abs(value_f), abs(value_fprime)) <= 2.0:
        return Classification.ProductCompatible
    return classify(value_f**2 + value_fprime**2, n)


@dataclass(frozen=True)
class BellOutcome:
    value_f: float
    value_fprime: float
    settings: BellSettings
    sum_sq: float = field(init=False)
    classification: Classification = field(init=False)
    mode: str | None = None
    distinct_optima: int = 1
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        n = self.settings.n
        object.__setattr__(self, "sum_sq", self.value_f**2 + self.value_fprime**2)
        object.__setattr__(self, "classification", classify_values(self.value_f, self.value_fprime, n))
        if abs(self.value_f) > bound_f(n) * (1 + 1e-9):
            raise ArgumentError(f"|<F{n}>| = {abs(self.value_f)!r} exceeds the quantum bound")


def evaluate(state: PureState, settings: BellSettings, **kwargs) -> BellOutcome:
    """Expectation values of F_n and F'_n from the dense operators."""
    if settings.n != state.n_qubits:
        raise ArgumentError(f"{settings.n}-qubit settings for a {state.n_qubits}-qubit state")
    f, fp = build_pair(settings)
    return BellOutcome(expectation(state, f), expectation(state, fp), settings, **kwargs)


# correlator route -----------------------------------------------------------

_U4_COEF = np.array([(1 - 1j) / 2, (1 + 1j) / 2])
_U_COEF = np.array([1.0, 1j])


def pair_coefficients(n: int) -> np.ndarray:
    """Complex weights (c, c') with u_k = c v_k + c' v'_k, shape (n, 2)."""
    coef = np.tile(_U_COEF, (n, 1))
    if n == 4:
        coef[3] = _U4_COEF
    return coef


def mk_complex(T: np.ndarray, settings: np.ndarray) -> np.ndarray:
    """P = T(u_1, ..., u_n) for a batch of settings of shape (..., n, 2, 3)."""
    settings = np.asarray(settings, dtype=float)
    n = T.ndim
    u = np.einsum("kp,...kpi->...ki", pair_coefficients(n), settings)
    letters = "ijkl"[:n]
    spec = letters + "," + ",".join(f"...{c}" for c in letters) + "->..."
    return np.einsum(spec, T, *(u[..., k, :] for k in range(n)))


def mk_values(state_or_tensor, settings: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(<F_n>, <F'_n>) evaluated through the correlation tensor."""
    T = correlation_tensor(state_or_tensor) if isinstance(state_or_tensor, PureState) else state_or_tensor
    P = mk_complex(T, settings)
    return P.imag, -P.real


def random_settings(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform random unit vectors arranged as settings arrays (size, n, 2, 3)."""
    shape = (n, 2) if size is None else (size, n, 2)
    v = rng.standard_normal(shape + (3,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
