"""Parameter sweeps, single-scale fits and figure tables.

Tables are plain column lists with rows of floats or short strings.  CSV
output uses nine significant digits, LF line endings and normalizes -0 so a
fixed seed always produces the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import models as M
from .bell import BellOutcome
from .errors import ArgumentError, ClosedFormSingularityError, FitError, ValidityRangeError
from .measures import measure_report
from .optimize import Mode, OptimizerConfig, optimize_sweep
from .states import PureState, generalized_ghz

TARGETS = ("gen_ghz", "psi5", "psi7", "sup78", "phi1", "phi2")
QUANTITIES = ("Q", "sum_sq_C", "tangle", "bell_mode_a", "bell_mode_b", "pair_concurrences", "closed_form")
AXES = {
    "gen_ghz": ("g", "g2"),
    "psi5": ("delta",),
    "psi7": ("delta",),
    "sup78": ("delta",),
    "phi1": ("J", "Js"),
    "phi2": ("J", "Js"),
}
DEFAULT_POINTS = 101


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.rows], dtype=float)

    def select(self, names: Sequence[str]) -> "Table":
        idx = [self.columns.index(c) for c in names]
        return Table(list(names), [[r[k] for k in idx] for r in self.rows])

    def extend(self, other: "Table") -> None:
        if other.columns != self.columns:
            raise ArgumentError("cannot concatenate tables with different columns")
        self.rows.extend(other.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_value(v) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [dict(zip(self.columns, (_json_value(v) for v in r))) for r in self.rows]
        return json.dumps({"columns": self.columns, "rows": rows}, indent=1, allow_nan=False) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ArgumentError(f"unknown output format {fmt!r}")

    def write(self, path: str | Path, fmt: str = "csv") -> Path:
        path = Path(path)
        text = self.render(fmt)
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
        return path

    @classmethod
    def read_csv(cls, path: str | Path) -> "Table":
        try:
            with open(path, encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                rows = [[_parse_cell(c) for c in r] for r in reader if r]
        except OSError as exc:
            raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
        except StopIteration:
            raise ArgumentError(f"{path} is empty") from None
        return cls(header, rows)


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return "nan"
    if x == 0:
        x = 0.0
    return format(x, ".9g")


def _json_value(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_, int, np.integer)):
        return int(v)
    x = float(v)
    if math.isnan(x):
        return None
    return float(format_value(x))


def _parse_cell(c: str):
    try:
        return float(c)
    except ValueError:
        return c


# sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    target: str
    axis: str
    lo: float
    hi: float
    points: int = DEFAULT_POINTS
    quantities: tuple[str, ...] = ("Q",)
    cfg: OptimizerConfig = OptimizerConfig()
    #: values of the parameters that are not swept, e.g. {"Js": 2.0}
    fixed: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ArgumentError(f"unknown sweep target {self.target!r}; choose from {', '.join(TARGETS)}")
        if self.axis not in AXES[self.target]:
            raise ArgumentError(f"{self.target} sweeps over {' or '.join(AXES[self.target])}, not {self.axis!r}")
        if self.points < 2:
            raise ArgumentError("a sweep needs at least two points")
        if not self.lo < self.hi:
            raise ArgumentError(f"sweep range needs lo < hi, got [{self.lo}, {self.hi}]")
        quantities = tuple(self.quantities)
        unknown = set(quantities) - set(QUANTITIES)
        if unknown:
            raise ArgumentError(f"unknown quantities {sorted(unknown)}")
        object.__setattr__(self, "quantities", quantities)
        object.__setattr__(self, "fixed", tuple(sorted(dict(self.fixed).items())))

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class SweepPoint:
    params: dict[str, float]
    state: PureState
    closed: object  # MeasureReport or None when the closed form is unavailable
    singular: bool


def _model_params(target: str, values: dict[str, float]):
    if target in ("psi5", "psi7", "sup78"):
        return M.Model3Params(values.get("J", 1.0), values["delta"], values.get("M", 0.0))
    return M.Model4Params(values.get("J", 2.0), values.get("Js", 2.0))


def sweep_point(target: str, axis: str, x: float, fixed: dict[str, float] | None = None) -> SweepPoint:
    """State and closed-form report at one grid value."""
    values = dict(fixed or {})
    if target == "gen_ghz":
        g = math.sqrt(max(0.0, x)) if axis == "g2" else x
        state = generalized_ghz(min(1.0, g))
        g2 = g * g
        return SweepPoint({"g": g, "g2": g2}, state, None, False)
    values[axis] = x
    p = _model_params(target, values)
    params = {"delta": p.delta} if target in ("psi5", "psi7", "sup78") else {"J": p.J, "Js": p.Js}
    state = M.state_for(target, p)
    # phi2 falls back to its J -> 0+ limit state where a2 diverges
    singular = target == "phi2" and abs(p.J) < M.PHI2_LIMIT_J
    try:
        closed = M.closed_form_measures(target, p)
    except (ClosedFormSingularityError, ValidityRangeError):
        closed, singular = None, True
    return SweepPoint(params, state, closed, singular)


def _pair_names(n: int) -> list[str]:
    return [f"C{i}{j}" for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def run_sweep(spec: SweepSpec) -> Table:
    """One row per grid value with the requested quantities.

    Bell columns come from optimization warm-started along the grid.
    """
    fixed = dict(spec.fixed)
    pts = [sweep_point(spec.target, spec.axis, float(x), fixed) for x in spec.grid()]
    n = pts[0].state.n_qubits
    param_cols = list(pts[0].params)
    q = spec.quantities

    mode_a = optimize_sweep((p.state for p in pts), replace_mode(spec.cfg, Mode.MaximizeF)) if "bell_mode_a" in q else None
    mode_b = optimize_sweep((p.state for p in pts), replace_mode(spec.cfg, Mode.MaximizeSumSq)) if "bell_mode_b" in q else None

    columns = list(param_cols)
    if "pair_concurrences" in q:
        columns += _pair_names(n)
    if "Q" in q:
        columns.append("Q")
    if "sum_sq_C" in q:
        columns.append("sum_sq_C")
    if "tangle" in q:
        if n != 3:
            raise ArgumentError("the tangle is only defined for three-qubit targets")
        columns.append("tangle")
    if mode_a is not None:
        columns += [f"max_abs_F{n}", f"F{n}prime_at_opt", "sum_sq_mode_a"]
    if mode_b is not None:
        columns.append("sum_sq_mode_b")
    if "closed_form" in q:
        columns += ["cf_Q", "cf_sum_sq_C"] + (["cf_tangle"] if n == 3 else [])
    columns.append("singular")

    table = Table(columns)
    for k, p in enumerate(pts):
        rep = measure_report(p.state)
        d = rep.as_dict()
        row = [p.params[c] for c in param_cols]
        if "pair_concurrences" in q:
            row += [d[c] for c in _pair_names(n)]
        if "Q" in q:
            row.append(rep.global_q)
        if "sum_sq_C" in q:
            row.append(rep.sum_sq_concurrence)
        if "tangle" in q:
            row.append(rep.tangle3)
        if mode_a is not None:
            o = mode_a[k]
            row += [abs(o.value_f), o.value_fprime, o.sum_sq]
        if mode_b is not None:
            row.append(mode_b[k].sum_sq)
        if "closed_form" in q:
            c = p.closed
            if c is None:
                row += [math.nan, math.nan] + ([math.nan] if n == 3 else [])
            else:
                row += [c.global_q, c.sum_sq_concurrence] + ([c.tangle3] if n == 3 else [])
        row.append(int(p.singular))
        table.rows.append(row)
    return table


def replace_mode(cfg: OptimizerConfig, mode: Mode) -> OptimizerConfig:
    return replace(cfg, mode=mode)


# fits -----------------------------------------------------------------------

FIT_MODELS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "g_sqrt": lambda g: g * np.sqrt(np.clip(1.0 - g * g, 0.0, None)),
    "g2": lambda g: g * g * (1.0 - g * g),
}


@dataclass(frozen=True)
class FitResult:
    scale: float
    residual_rms: float
    model: str
    points: int


def fit_scale(x: Sequence[float], y: Sequence[float], model: str, mask: Sequence[bool] | None = None) -> FitResult:
    """Least-squares c for y ~ c f(x) with f one of FIT_MODELS (x is g)."""
    if model not in FIT_MODELS:
        raise ArgumentError(f"unknown fit model {model!r}; choose from {', '.join(FIT_MODELS)}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ArgumentError("x and y must have the same length")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        x, y = x[mask], y[mask]
    if x.size < 3:
        raise FitError(f"a fit needs at least 3 points, got {x.size}")
    f = FIT_MODELS[model](x)
    ff = float(f @ f)
    if ff <= 1e-300:
        raise FitError("fit basis vanishes on every grid point")
    c = float(y @ f) / ff
    rms = float(np.sqrt(np.mean((y - c * f) ** 2)))
    return FitResult(c, rms, model, int(x.size))


def violation_mask(values: Sequence[float], bound: float = 2.0) -> np.ndarray:
    return np.abs(np.asarray(values, dtype=float)) > bound


# figures --------------------------------------------------------------------

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "table3")


def figure(name: str, cfg: OptimizerConfig = OptimizerConfig(), points: int = DEFAULT_POINTS) -> Table:
    if name not in FIGURES:
        raise ArgumentError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    return _FIGURE_BUILDERS[name](cfg, points)


def _fig1(cfg, points):
    spec = SweepSpec("gen_ghz", "g2", 0.0, 1.0, points, ("bell_mode_a", "bell_mode_b"), cfg)
    cols = ["g", "g2", "max_abs_F3", "F3prime_at_opt", "sum_sq_mode_a", "sum_sq_mode_b"]
    return run_sweep(spec).select(cols)


def _fig2(cfg, points):
    out = None
    per = ["Q", "sum_sq_C", "max_abs_F3", "F3prime_at_opt", "sum_sq_mode_a"]
    for target in ("psi5", "psi7"):
        t = run_sweep(SweepSpec(target, "delta", 0.0, 6.0, points, ("Q", "sum_sq_C", "bell_mode_a"), cfg))
        part = t.select(per)
        if out is None:
            out = Table(["delta"], [[v] for v in t.column("delta")])
        out.columns += [f"{c}_{target}" for c in per]
        for row, extra in zip(out.rows, part.rows):
            row.extend(extra)
    return out


def _fig3(cfg, points):
    spec = SweepSpec("sup78", "delta", 0.0, 6.0, points, ("Q", "sum_sq_C", "tangle", "bell_mode_a"), cfg)
    return run_sweep(spec).select(["delta", "Q", "sum_sq_C", "tangle", "max_abs_F3"])


def _two_axis(target, lo, hi, points, quantities, cfg, cols):
    out = Table(["axis"] + cols)
    for axis, fixed in (("J", {"Js": 2.0}), ("Js", {"J": 2.0})):
        t = run_sweep(SweepSpec(target, axis, lo, hi, points, quantities, cfg, tuple(fixed.items())))
        for row in t.select(cols).rows:
            out.rows.append([axis] + row)
    return out


def _fig4(cfg, points):
    cols = ["J", "Js"] + _pair_names(4) + ["Q", "sum_sq_C", "max_abs_F4", "F4prime_at_opt", "sum_sq_mode_a"]
    return _two_axis("phi1", 0.0, 10.0, points, ("pair_concurrences", "Q", "sum_sq_C", "bell_mode_a"), cfg, cols)


def _fig5(cfg, points):
    cols = ["J", "Js", "sum_sq_C", "Q", "max_abs_F4", "F4prime_at_opt", "sum_sq_mode_a"]
    t = _two_axis("phi2", 0.1, 10.0, points, ("Q", "sum_sq_C", "bell_mode_a"), cfg, cols)
    k = t.columns.index("sum_sq_C")
    t.columns.insert(k + 1, "one_minus_sum_sq_C")
    for row in t.rows:
        row.insert(k + 1, 1.0 - row[k])
    return t


TABLE3_LIMITS = (
    # J -> 0+ is singular in the closed form; J = 0.01 stands in for it
    ("Js=2,J->0+ (J=0.01)", 0.01, 2.0),
    ("J=2,Js=0", 2.0, 0.0),
)


def table3_outcomes(cfg: OptimizerConfig = OptimizerConfig()) -> list[tuple[str, float, float, BellOutcome, BellOutcome]]:
    """Free and xy-plane mode-A optima of phi2 at the two GHZ-like limits."""
    out = []
    for label, J, Js in TABLE3_LIMITS:
        state = M.phi2(M.Model4Params(J, Js))
        free = optimize_sweep([state], replace(cfg, mode=Mode.MaximizeF))[0]
        plane = optimize_sweep([state], replace(cfg, mode=Mode.MaximizeF, xy_plane=True))[0]
        out.append((label, J, Js, free, plane))
    return out


def _table3(cfg, points):
    t = Table(["limit", "J", "Js", "settings", "vector", "x", "y", "z", "value_f", "value_fprime", "sum_sq"])
    for label, J, Js, free, plane in table3_outcomes(cfg):
        for tag, o in (("free", free), ("xy_plane", plane)):
            for vec, x, y, z in o.settings.rows():
                t.rows.append([label, J, Js, tag, vec, x, y, z, o.value_f, o.value_fprime, o.sum_sq])
    return t


_FIGURE_BUILDERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "table3": _table3}
