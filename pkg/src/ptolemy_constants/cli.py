"""Command-line entry point: ``ptolemy {estimate,sweep,hessian,limit,open}``.

Exit codes: 0 success, 2 usage or argument error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys

import numpy as np

from .analytic import RECTANGLE_THRESHOLD
from .curves import Ellipse, InvalidCurve, parse_curve
from .experiments import (
    SweepRecord,
    analytic_reference,
    fmt,
    limit_table,
    open_case,
    run_sweep,
    sweep_eps,
    timed_estimate,
    write_sweep_csv,
)
from .optimizer import OptimizeOptions, Status
from .ratio import (
    CRITICAL_POINT,
    ellipse_hessian_closed_form,
    fd_noise_floor,
    gradient_fd,
    hessian_fd,
    ratio_on_curve,
    second_derivative_test,
)

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def _curve_arg(text: str):
    try:
        return parse_curve(text)
    except InvalidCurve as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _eps_arg(text: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"eccentricity must lie in [0, 1), got {text}")
    return v


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--grid", type=int, default=default(48), help="grid resolution per curve")
    parser.add_argument("--starts", type=int, default=default(16), help="refined seeds of each kind")
    parser.add_argument("--tol", type=float, default=default(1e-12), help="simplex value spread")
    parser.add_argument("--seed", type=int, default=default(0), help="random seed")
    parser.add_argument("--format", choices=("json", "csv"), default=default(None))
    parser.add_argument("--out", default=default(None), help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptolemy", description="Numerical Ptolemy constants of planar closed curves."
    )
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the constant of one curve")
    p.add_argument("--curve", type=_curve_arg, required=True)
    _global_flags(p, suppress=True)

    p = sub.add_parser("sweep", help="estimate along an eccentricity grid")
    p.add_argument("--curve", choices=("ellipse", "rectangle"), required=True)
    p.add_argument("--eps-min", type=_eps_arg, required=True)
    p.add_argument("--eps-max", type=_eps_arg, required=True)
    p.add_argument("--steps", type=int, required=True)
    _global_flags(p, suppress=True)

    p = sub.add_parser("hessian", help="check the ellipse Hessian at (0, pi/2, pi, 3pi/2)")
    p.add_argument("--eps", type=_eps_arg, required=True)
    p.add_argument("--step", type=float, default=1e-3)
    _global_flags(p, suppress=True)

    p = sub.add_parser("limit", help="tabulate the rectangle corner family as delta shrinks")
    p.add_argument("--eps", type=_eps_arg, required=True)
    p.add_argument("--delta-start", type=float, default=0.1)
    p.add_argument("--factor", type=float, default=0.5)
    p.add_argument("--count", type=int, default=10)
    _global_flags(p, suppress=True)

    p = sub.add_parser("open", help="repeat an estimate across seeds to gauge stability")
    p.add_argument("--curve", type=_curve_arg, required=True)
    p.add_argument("--seeds", type=int, default=5)
    _global_flags(p, suppress=True)
    return parser


def _options(args) -> OptimizeOptions:
    try:
        return OptimizeOptions(
            grid_points=args.grid, starts=args.starts, value_tolerance=args.tol, rng_seed=args.seed
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


@contextlib.contextmanager
def _output(args):
    if args.out is None:
        yield sys.stdout
        return
    try:
        fh = open(args.out, "w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from exc
    with fh:
        yield fh


def _dump_json(obj, stream) -> None:
    json.dump(obj, stream, indent=2)
    stream.write("\n")


def cmd_estimate(args) -> int:
    opts = _options(args)
    result, secs = timed_estimate(args.curve, opts)
    record = SweepRecord.from_estimate(args.curve, result, secs)
    with _output(args) as out:
        if args.format == "csv":
            write_sweep_csv([record], out)
        else:
            payload = {"curve": args.curve.label, "estimate": result.value}
            payload.update(result.to_dict())
            payload.update(analytic_reference(args.curve))
            if record.abs_error is not None:
                payload["abs_error"] = record.abs_error
            payload["seconds"] = secs
            _dump_json(payload, out)
    return EXIT_NUMERICAL if result.status is Status.GRID_ONLY else 0


def cmd_sweep(args) -> int:
    opts = _options(args)
    try:
        eps_values = sweep_eps(args.eps_min, args.eps_max, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    records, notes = run_sweep(args.curve, eps_values, opts)
    errors = [r.abs_error for r in records if r.abs_error is not None]
    summary = [f"max_abs_error={fmt(max(errors))}" if errors else "max_abs_error="]
    summary += [f"note: {n}" for n in notes]
    with _output(args) as out:
        if args.format == "json":
            _dump_json({"records": [r.as_dict() for r in records], "notes": notes}, out)
        else:
            write_sweep_csv(records, out)
    # keep stdout parseable when the CSV itself goes there
    info = sys.stderr if args.out is None else sys.stdout
    for line in summary:
        print(line, file=info)
    failed = any(r.status == Status.GRID_ONLY.value for r in records)
    return EXIT_NUMERICAL if failed else 0


def cmd_hessian(args) -> int:
    if not args.step > 0.0:
        raise UsageError("--step must be positive")
    curve = Ellipse(args.eps)
    closed = ellipse_hessian_closed_form(args.eps)
    fd = hessian_fd(curve, CRITICAL_POINT, args.step)
    grad = gradient_fd(curve, CRITICAL_POINT, args.step)
    payload = {
        "eps": args.eps,
        "step": args.step,
        "point_theta": [2.0 * math.pi * t for t in CRITICAL_POINT],
        "closed_form": closed.tolist(),
        "finite_difference": fd.tolist(),
        "max_diff": float(np.max(np.abs(fd - closed))),
        "gradient": grad.tolist(),
        "gradient_norm": float(np.max(np.abs(grad))),
        "classification_closed_form": second_derivative_test(closed).value,
        "classification_finite_difference": second_derivative_test(
            fd, noise=fd_noise_floor(ratio_on_curve(curve, CRITICAL_POINT), args.step)
        ).value,
    }
    with _output(args) as out:
        _dump_json(payload, out)
    return 0


def cmd_limit(args) -> int:
    if args.eps > RECTANGLE_THRESHOLD:
        raise UsageError("the corner family needs eps <= sqrt(3)/2")
    try:
        table = limit_table(args.eps, args.delta_start, args.factor, args.count)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with _output(args) as out:
        if args.format == "json":
            _dump_json(table.as_dict(), out)
        else:
            out.write("delta,ratio,abs_gap\n")
            for d, r, g in zip(table.deltas, table.ratios, table.gaps):
                out.write(f"{fmt(d)},{fmt(r)},{fmt(g)}\n")
            order = "" if table.order is None else fmt(table.order)
            out.write(f"# monotone={str(table.monotone).lower()} order={order}\n")
    return 0


def cmd_open(args) -> int:
    opts = _options(args)
    try:
        report = open_case(args.curve, args.seeds, opts)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with _output(args) as out:
        _dump_json(report, out)
    return EXIT_NUMERICAL if "GridOnly" in report["statuses"] else 0


COMMANDS = {
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
    "hessian": cmd_hessian,
    "limit": cmd_limit,
    "open": cmd_open,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ptolemy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError) as exc:
        print(f"ptolemy: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
