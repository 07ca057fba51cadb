"""Command-line entry point.

Exit codes: 0 success, 2 bad arguments, 3 numeric inconsistency, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import models as M
from .errors import ArgumentError, NumericConsistencyError
from .measures import measure_report
from .optimize import Mode, OptimizerConfig, TransitionQuery, find_transition, optimize
from .states import PureState, generalized_ghz, ghz_state, w_state
from .sweep import AXES, FIGURES, FIT_MODELS, QUANTITIES, TARGETS, SweepSpec, Table, fit_scale, figure, run_sweep, sweep_point, violation_mask

EXIT_ARGUMENT, EXIT_NUMERIC, EXIT_IO = 2, 3, 4

_FIXED_STATES = {"ghz3": lambda: ghz_state(3), "ghz4": lambda: ghz_state(4), "w3": lambda: w_state(3), "w4": lambda: w_state(4)}
_MODEL3 = ("psi5", "psi6", "psi7", "psi8", "sup78")
_MODEL4 = ("phi1", "phi2")


def _parse_kv(text: str) -> dict[str, float]:
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ArgumentError(f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ArgumentError(f"{key.strip()} needs a number, got {value!r}") from None
    return out


def _check_keys(name: str, kv: dict, allowed: tuple[str, ...]) -> None:
    extra = set(kv) - set(allowed)
    if extra:
        raise ArgumentError(f"{name} accepts {', '.join(allowed)}; unexpected {', '.join(sorted(extra))}")


def _read_amplitudes(path: str) -> PureState:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{path}: invalid JSON ({exc.msg})") from None
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise ArgumentError(f"{path}: expected a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ArgumentError(f"{path}: expected a list of [re, im] pairs")
    return PureState(arr[:, 0] + 1j * arr[:, 1])


def parse_state(text: str) -> PureState:
    """Build a state from the command-line mini-language.

    ``ghz3``, ``w3``, ``genghz:g=0.6``, ``psi5:J=1,delta=2``, ``sup78:delta=3``,
    ``phi1:J=2,Js=2`` or ``file:<path>`` with a JSON list of [re, im] pairs.
    """
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name == "file":
        if not rest:
            raise ArgumentError("file: needs a path")
        return _read_amplitudes(rest)
    kv = _parse_kv(rest)
    if name in _FIXED_STATES:
        _check_keys(name, kv, ())
        return _FIXED_STATES[name]()
    if name == "genghz":
        _check_keys(name, kv, ("g",))
        if "g" not in kv:
            raise ArgumentError("genghz needs g=<value>")
        return generalized_ghz(kv["g"])
    if name in _MODEL3:
        _check_keys(name, kv, ("J", "delta", "M"))
        return M.state_for(name, M.Model3Params(kv.get("J", 1.0), kv.get("delta", 0.0), kv.get("M", 0.0)))
    if name in _MODEL4:
        _check_keys(name, kv, ("J", "Js"))
        return M.state_for(name, M.Model4Params(kv.get("J", 2.0), kv.get("Js", 2.0)))
    known = sorted(_FIXED_STATES) + ["genghz", *_MODEL3, *_MODEL4, "file"]
    raise ArgumentError(f"unknown state {name!r}; known: {', '.join(known)}")


def _config(args, mode: Mode = Mode.MaximizeF) -> OptimizerConfig:
    return OptimizerConfig(mode=mode, restarts=args.restarts, seed=args.seed)


def _emit(table: Table, args) -> None:
    text = table.render(args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        table.write(args.out, args.format)


def cmd_measures(args) -> None:
    state = parse_state(args.state)
    d = measure_report(state).check().as_dict()
    _emit(Table(list(d), [list(d.values())]), args)


def cmd_bell_opt(args) -> None:
    state = parse_state(args.state)
    out = optimize(state, _config(args, Mode.parse(args.mode)))
    cols = ["mode", "value_f", "value_fprime", "sum_sq", "classification", "distinct_optima"]
    row = [out.mode, out.value_f, out.value_fprime, out.sum_sq, out.classification.value, out.distinct_optima]
    for label, x, y, z in out.settings.rows():
        cols += [f"{label}_x", f"{label}_y", f"{label}_z"]
        row += [x, y, z]
    for w in out.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(Table(cols, [row]), args)


def cmd_sweep(args) -> None:
    quantities = tuple(q.strip() for q in args.quantities.split(",") if q.strip())
    spec = SweepSpec(
        args.target,
        args.axis or AXES[args.target][0],
        args.lo,
        args.hi,
        args.points,
        quantities,
        _config(args),
        tuple(_parse_kv(args.fixed).items()),
    )
    _emit(run_sweep(spec), args)


def cmd_fit(args) -> None:
    if args.input:
        table = Table.read_csv(args.input)
    else:
        table = figure("fig1", _config(args), args.points)
    for col in (args.x, args.y):
        if col not in table.columns:
            raise ArgumentError(f"column {col!r} not in table; have {', '.join(table.columns)}")
    x, y = table.column(args.x), table.column(args.y)
    fits = [("full", fit_scale(x, y, args.model))]
    if args.violation_only:
        if args.violation_column not in table.columns:
            raise ArgumentError(f"column {args.violation_column!r} not in table")
        mask = violation_mask(table.column(args.violation_column), args.violation_bound)
        fits.append(("violation_only", fit_scale(x, y, args.model, mask)))
    t = Table(["domain", "model", "scale", "residual_rms", "points"])
    for domain, f in fits:
        t.rows.append([domain, f.model, f.scale, f.residual_rms, f.points])
    _emit(t, args)


def cmd_figure(args) -> None:
    table = figure(args.name, _config(args), args.points)
    if args.out is None:
        args.out = f"{args.name}.{args.format}"
    _emit(table, args)


def cmd_transition(args) -> None:
    fixed = _parse_kv(args.fixed)
    axis = args.axis or AXES[args.target][0]
    if axis not in AXES[args.target]:
        raise ArgumentError(f"{args.target} has axes {', '.join(AXES[args.target])}")

    def state_at(x: float) -> PureState:
        return sweep_point(args.target, axis, x, fixed).state

    q = TransitionQuery(state_at, axis, (args.lo, args.hi), args.threshold, args.refine_tol, args.quantity, args.scan_points)
    value = find_transition(q, _config(args, Mode.parse(args.mode)))
    _emit(Table(["target", "axis", "threshold", "quantity", "value"], [[args.target, axis, args.threshold, args.quantity, value]]), args)


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # flags are accepted before or after the subcommand
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="optimizer seed")
    parser.add_argument("--restarts", type=int, default=default(64), help="random restarts per optimization")
    parser.add_argument("--out", default=default(None), help="output path ('-' for stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=default("csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qentangle", description="Entanglement measures and Mermin-Klyshko optimization.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measures", parents=[common], help="concurrences, i-concurrences, Q and tangle of a state")
    p.add_argument("state")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("bell-opt", parents=[common], help="optimize F_n over measurement directions")
    p.add_argument("state")
    p.add_argument("--mode", choices=("a", "b"), default="a")
    p.set_defaults(func=cmd_bell_opt)

    p = sub.add_parser("sweep", parents=[common], help="tabulate quantities along a model parameter")
    p.add_argument("--target", choices=TARGETS, required=True)
    p.add_argument("--axis")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--quantities", default="Q", help=f"comma list from {', '.join(QUANTITIES)}")
    p.add_argument("--fixed", default="", help="other parameters, e.g. Js=2")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", parents=[common], help="single-scale least-squares fit of a table column")
    p.add_argument("--input", help="CSV table; defaults to a fresh fig1 sweep")
    p.add_argument("--x", default="g")
    p.add_argument("--y", default="max_abs_F3")
    p.add_argument("--model", choices=sorted(FIT_MODELS), default="g_sqrt")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--violation-only", action="store_true", help="also fit only where the violation column exceeds the bound")
    p.add_argument("--violation-column", default="max_abs_F3")
    p.add_argument("--violation-bound", type=float, default=2.0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("figure", parents=[common], help="write the data table behind a figure")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("transition", parents=[common], help="locate a threshold crossing of the optimized Bell value")
    p.add_argument("--target", choices=TARGETS, required=True)
    p.add_argument("--axis")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--fixed", default="")
    p.add_argument("--threshold", type=float, default=8.0)
    p.add_argument("--quantity", choices=("sum_sq", "value_f"), default="sum_sq")
    p.add_argument("--mode", choices=("a", "b"), default="a")
    p.add_argument("--refine-tol", type=float, default=0.01)
    p.add_argument("--scan-points", type=int, default=11)
    p.set_defaults(func=cmd_transition)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NumericConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
