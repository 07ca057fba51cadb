"""Multistart maximization of Mermin-Klyshko expectations over measurement directions.

Every direction is written in spherical angles (theta, phi), so the search
space is unconstrained: 12 angles for three qubits, 16 for four.  Each
restart runs L-BFGS on the angles with the exact gradient of the correlator
form; the best restart wins, ties going to the lowest restart index.

Two objectives are supported:

``Mode.MaximizeF``
    maximize <F_n>; <F'_n> is then read off at the optimum.  Flipping the
    last qubit's pair flips the sign of <F_n>, so this is also the maximum
    of |<F_n>|.
``Mode.MaximizeSumSq``
    maximize <F_n>^2 + <F'_n>^2 directly.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import constants as C
from .bell import BellOutcome, BellSettings, Direction, evaluate, pair_coefficients
from .errors import ArgumentError, BracketError
from .states import PureState, correlation_tensor

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    MaximizeF = "a"
    MaximizeSumSq = "b"

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, Mode):
            return value
        key = str(value).lower()
        aliases = {"a": cls.MaximizeF, "maximizef": cls.MaximizeF, "b": cls.MaximizeSumSq, "maximizesumsq": cls.MaximizeSumSq}
        if key not in aliases:
            raise ArgumentError(f"unknown optimization mode {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class OptimizerConfig:
    mode: Mode = Mode.MaximizeF
    restarts: int = 64
    local_tol: float = 1e-9
    max_iters: int = 2000
    seed: int = 0
    #: restrict every direction to the xy plane (z components fixed at 0)
    xy_plane: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.restarts < 1:
            raise ArgumentError("restarts must be >= 1")
        if not self.local_tol > 0:
            raise ArgumentError("local_tol must be positive")
        if self.max_iters < 1:
            raise ArgumentError("max_iters must be >= 1")


def sample_direction(rng: np.random.Generator) -> Direction:
    """Uniform point on the unit sphere."""
    theta, phi = _sample_angles(rng, 1)[0]
    return Direction.from_angles(theta, phi)


def _sample_angles(rng: np.random.Generator, count: int) -> np.ndarray:
    u = rng.random((count, 2))
    return np.stack([np.arccos(2.0 * u[:, 0] - 1.0), 2.0 * np.pi * u[:, 1]], axis=-1)


def restart_angles(seed: int, index: int, n: int) -> np.ndarray:
    """Starting angles of restart ``index``; shape (n, 2, 2) as (qubit, primed, (theta, phi)).

    Each restart owns its own stream, so a run with more restarts repeats
    the starts of a run with fewer.
    """
    rng = np.random.default_rng([seed, index])
    return _sample_angles(rng, 2 * n).reshape(n, 2, 2)


def angles_to_vectors(angles: np.ndarray) -> np.ndarray:
    th, ph = angles[..., 0], angles[..., 1]
    st = np.sin(th)
    return np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=-1)


def vectors_to_angles(vectors: np.ndarray) -> np.ndarray:
    v = np.asarray(vectors, dtype=float)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return np.stack([np.arccos(np.clip(v[..., 2], -1.0, 1.0)), np.arctan2(v[..., 1], v[..., 0])], axis=-1)


class _Objective:
    """Value and angle gradient of the MK polynomial through the correlation tensor."""

    def __init__(self, T: np.ndarray, mode: Mode, xy_plane: bool):
        self.T = T
        self.n = T.ndim
        self.mode = mode
        self.xy_plane = xy_plane
        self.coef = pair_coefficients(self.n)
        letters = "ijkl"[: self.n]
        # leave-one-out contraction specs
        self._loo = []
        for k in range(self.n):
            others = [c for m, c in enumerate(letters) if m != k]
            self._loo.append(letters + "," + ",".join(others) + "->" + letters[k])

    def complex_value(self, angles: np.ndarray) -> tuple[complex, np.ndarray]:
        """P and dP/d(angles) with angles shaped (n, 2, 2)."""
        th, ph = angles[..., 0], angles[..., 1]
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        v = np.stack([st * cp, st * sp, ct], axis=-1)
        d_th = np.stack([ct * cp, ct * sp, -st], axis=-1)
        d_ph = np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1)
        u = np.einsum("kp,kpi->ki", self.coef, v)
        g = np.stack([np.einsum(self._loo[k], self.T, *(u[m] for m in range(self.n) if m != k)) for k in range(self.n)])
        P = g[0] @ u[0]
        dP = np.empty((self.n, 2, 2), dtype=complex)
        dP[..., 0] = np.einsum("ki,kp,kpi->kp", g, self.coef, d_th)
        dP[..., 1] = np.einsum("ki,kp,kpi->kp", g, self.coef, d_ph)
        return P, dP

    def objective(self, P: complex) -> float:
        return P.imag if self.mode is Mode.MaximizeF else abs(P) ** 2

    def to_angles(self, x: np.ndarray) -> np.ndarray:
        if self.xy_plane:
            angles = np.empty((self.n, 2, 2))
            angles[..., 0] = np.pi / 2
            angles[..., 1] = x.reshape(self.n, 2)
            return angles
        return x.reshape(self.n, 2, 2)

    def from_angles(self, angles: np.ndarray) -> np.ndarray:
        return angles[..., 1].ravel().copy() if self.xy_plane else angles.ravel().copy()

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        P, dP = self.complex_value(self.to_angles(x))
        if self.mode is Mode.MaximizeF:
            val, grad = P.imag, dP.imag
        else:
            val, grad = abs(P) ** 2, 2.0 * (P.real * dP.real + P.imag * dP.imag)
        if self.xy_plane:
            grad = grad[..., 1]
        return -val, -grad.ravel()


def _local_ascent(obj: _Objective, angles0: np.ndarray, cfg: OptimizerConfig) -> tuple[np.ndarray, float, float]:
    x0 = obj.from_angles(angles0)
    start = -obj(x0)[0]
    res = minimize(
        obj,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": cfg.max_iters, "ftol": cfg.local_tol, "gtol": 1e-12},
    )
    return obj.to_angles(res.x), -float(res.fun), start


def _as_angles(start, n: int) -> np.ndarray:
    if isinstance(start, BellSettings):
        start = start.as_array()
    a = np.asarray(start, dtype=float)
    if a.shape == (n, 2, 3):
        return vectors_to_angles(a)
    if a.shape == (n, 2, 2):
        return a
    raise ArgumentError(f"warm start of shape {a.shape} does not fit {n} qubits")


def count_distinct(values: Iterable[float], tol: float = C.DISTINCT_OPTIMA_TOL) -> int:
    vals = np.sort(np.asarray(list(values), dtype=float))
    if vals.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(vals) > tol))


def optimize(
    state: PureState,
    cfg: OptimizerConfig = OptimizerConfig(),
    warm_starts: Sequence[BellSettings | np.ndarray] = (),
) -> BellOutcome:
    """Best Bell outcome over ``len(warm_starts) + cfg.restarts`` local ascents.

    Warm starts run first, followed by ``cfg.restarts`` seeded random starts.
    """
    n = state.n_qubits
    if n not in (3, 4):
        raise ArgumentError(f"Bell optimization is implemented for 3 or 4 qubits, got {n}")
    obj = _Objective(correlation_tensor(state), cfg.mode, cfg.xy_plane)
    starts = [_as_angles(w, n) for w in warm_starts]
    starts += [restart_angles(cfg.seed, i, n) for i in range(cfg.restarts)]
    if cfg.xy_plane:
        starts = [np.stack([np.full((n, 2), np.pi / 2), s[..., 1]], axis=-1) for s in starts]

    best_val, best_angles = -np.inf, None
    finals, improved = [], False
    for angles0 in starts:
        angles, val, start_val = _local_ascent(obj, angles0, cfg)
        finals.append(val)
        improved |= val > start_val + 1e-12
        if val > best_val:
            best_val, best_angles = val, angles

    settings = BellSettings.from_array(angles_to_vectors(best_angles))
    warnings = () if improved else ("no restart improved on its starting value",)
    out = evaluate(state, settings, mode=cfg.mode.value, distinct_optima=count_distinct(finals), warnings=warnings)
    if cfg.mode is Mode.MaximizeF and out.value_f < 0:
        # the objective is signed; make the reported settings reproduce |<F>|
        last = settings.pairs[-1]
        flipped = settings.pairs[:-1] + ((-last[0], -last[1]),)
        out = evaluate(state, BellSettings(flipped), mode=out.mode, distinct_optima=out.distinct_optima, warnings=warnings)
    return out


def optimize_sweep(
    states: Iterable[PureState],
    cfg: OptimizerConfig = OptimizerConfig(),
) -> list[BellOutcome]:
    """Optimize along a parameter path, seeding each point with its predecessor's optimum."""
    outcomes: list[BellOutcome] = []
    for state in states:
        warm = [outcomes[-1].settings] if outcomes else []
        outcomes.append(optimize(state, cfg, warm))
    return outcomes


@dataclass(frozen=True)
class TransitionQuery:
    """Where along a one-parameter family an optimized Bell quantity crosses ``threshold``."""

    state_at: Callable[[float], PureState]
    parameter: str
    bracket: tuple[float, float]
    threshold: float = 8.0
    refine_tol: float = 0.01
    #: "sum_sq" for <F>^2 + <F'>^2 or "value_f" for |<F>|
    quantity: str = "sum_sq"
    scan_points: int = 11

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo < hi:
            raise ArgumentError(f"bracket {self.bracket} must satisfy lo < hi")
        if not self.threshold > 0:
            raise ArgumentError("threshold must be positive")
        if self.quantity not in ("sum_sq", "value_f"):
            raise ArgumentError(f"unknown transition quantity {self.quantity!r}")
        if self.scan_points < 2:
            raise ArgumentError("scan needs at least two points")

    def measure(self, outcome: BellOutcome) -> float:
        return outcome.sum_sq if self.quantity == "sum_sq" else abs(outcome.value_f)


def find_transition(q: TransitionQuery, cfg: OptimizerConfig = OptimizerConfig()) -> float:
    """Scan the bracket with warm-started optimization, then bisect the first crossing.

    When the scan finds several crossings the one nearest ``lo`` is returned.
    """
    lo, hi = q.bracket
    xs = np.linspace(lo, hi, q.scan_points)
    outs = optimize_sweep((q.state_at(float(x)) for x in xs), cfg)
    ys = [q.measure(o) - q.threshold for o in outs]
    log.debug("transition scan %s: %s", q.parameter, list(zip(xs, ys)))

    for i in range(len(xs) - 1):
        if ys[i] == 0:
            return float(xs[i])
        if np.sign(ys[i]) != np.sign(ys[i + 1]):
            break
    else:
        if ys[-1] == 0:
            return float(xs[-1])
        raise BracketError(f"{q.quantity} does not cross {q.threshold} on {q.parameter} in [{lo}, {hi}]")

    a, b = float(xs[i]), float(xs[i + 1])
    ya, yb = ys[i], ys[i + 1]
    oa, ob = outs[i], outs[i + 1]
    while b - a > q.refine_tol:
        m = 0.5 * (a + b)
        om = optimize(q.state_at(m), cfg, [oa.settings, ob.settings])
        ym = q.measure(om) - q.threshold
        if ym == 0:
            return m
        if np.sign(ym) == np.sign(ya):
            a, ya, oa = m, ym, om
        else:
            b, yb, ob = m, ym, om
    # secant point inside the final bracket
    return float(a - ya * (b - a) / (yb - ya))


def with_restarts(cfg: OptimizerConfig, restarts: int) -> OptimizerConfig:
    return replace(cfg, restarts=restarts)
