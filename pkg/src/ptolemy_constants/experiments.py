"""Sweeps, limit tables and open-case runs, plus the CSV record format."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, fields, replace
from typing import Iterable, Optional

import numpy as np

from .analytic import (
    RECTANGLE_THRESHOLD,
    ellipse_bounds,
    ellipse_constant,
    rectangle_branches,
    rectangle_constant,
    rectangle_limit_family,
)
from .curves import Curve, Ellipse, Rectangle
from .optimizer import EstimateResult, OptimizeOptions, estimate_ptolemy_constant

CSV_COLUMNS = (
    "curve",
    "eps",
    "estimate",
    "closed_form",
    "lower_bound",
    "upper_bound",
    "abs_error",
    "status",
    "t1",
    "t2",
    "t3",
    "t4",
    "grid_best",
    "seconds",
)


def fmt(x: Optional[float]) -> str:
    """Ten significant digits, shortest of plain or scientific notation; empty for None."""
    if x is None:
        return ""
    return f"{x:.10g}"


def analytic_reference(curve: Curve) -> dict:
    """Closed form and bounds for ellipses and rectangles; empty for open cases."""
    if isinstance(curve, Ellipse):
        b = ellipse_bounds(curve.eccentricity)
        return {
            "closed_form": ellipse_constant(curve.eccentricity),
            "lower_bound": b.lower,
            "upper_bound": b.upper,
        }
    if isinstance(curve, Rectangle):
        # the rectangle law coincides with the known lower bound; no upper bound is implemented
        c = rectangle_constant(curve.eccentricity)
        return {"closed_form": c, "lower_bound": c}
    return {}


@dataclass(frozen=True)
class SweepRecord:
    curve: str
    eps: Optional[float]
    estimate: float
    closed_form: Optional[float]
    lower_bound: Optional[float]
    upper_bound: Optional[float]
    status: str
    argmax_t: tuple
    grid_best: float
    seconds: float
    abs_error: Optional[float] = None

    def __post_init__(self):
        if self.abs_error is None and self.closed_form is not None:
            object.__setattr__(self, "abs_error", abs(self.estimate - self.closed_form))

    @classmethod
    def from_estimate(cls, curve: Curve, result: EstimateResult, seconds: float) -> "SweepRecord":
        ref = analytic_reference(curve)
        return cls(
            curve=curve.label,
            eps=getattr(curve, "eccentricity", None),
            estimate=result.value,
            closed_form=ref.get("closed_form"),
            lower_bound=ref.get("lower_bound"),
            upper_bound=ref.get("upper_bound"),
            status=result.status.value,
            argmax_t=tuple(result.argmax),
            grid_best=result.grid_best,
            seconds=seconds,
        )

    def row(self) -> list[str]:
        return [
            self.curve,
            fmt(self.eps),
            fmt(self.estimate),
            fmt(self.closed_form),
            fmt(self.lower_bound),
            fmt(self.upper_bound),
            fmt(self.abs_error),
            self.status,
            *(fmt(t) for t in self.argmax_t),
            fmt(self.grid_best),
            fmt(self.seconds),
        ]

    @classmethod
    def from_row(cls, row: dict) -> "SweepRecord":
        def opt(key):
            return float(row[key]) if row[key] != "" else None

        return cls(
            curve=row["curve"],
            eps=opt("eps"),
            estimate=float(row["estimate"]),
            closed_form=opt("closed_form"),
            lower_bound=opt("lower_bound"),
            upper_bound=opt("upper_bound"),
            status=row["status"],
            argmax_t=tuple(float(row[k]) for k in ("t1", "t2", "t3", "t4")),
            grid_best=float(row["grid_best"]),
            seconds=float(row["seconds"]),
            abs_error=opt("abs_error"),
        )

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["argmax_t"] = list(self.argmax_t)
        return d


def write_sweep_csv(records: Iterable[SweepRecord], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())


def read_sweep_csv(stream) -> list[SweepRecord]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    return [SweepRecord.from_row(row) for row in csv.DictReader(stream)]


def timed_estimate(curve: Curve, opts: OptimizeOptions) -> tuple[EstimateResult, float]:
    t0 = time.perf_counter()
    r = estimate_ptolemy_constant(curve, opts)
    return r, time.perf_counter() - t0


def sweep_eps(eps_min: float, eps_max: float, steps: int) -> np.ndarray:
    if not 0.0 <= eps_min <= eps_max < 1.0:
        raise ValueError("need 0 <= eps_min <= eps_max < 1")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if steps == 1:
        return np.array([eps_min])
    return np.linspace(eps_min, eps_max, steps)


def run_sweep(family: str, eps_values, opts: OptimizeOptions) -> tuple[list[SweepRecord], list[str]]:
    """Estimate the constant along an eccentricity grid.

    Returns the records in eps order and a list of notes; rectangle rows within
    1e-6 of the branch threshold get a note with both branch values.
    """
    ctor = {"ellipse": Ellipse, "rectangle": Rectangle}[family]
    records, notes = [], []
    for eps in eps_values:
        curve = ctor(float(eps))
        result, secs = timed_estimate(curve, opts)
        records.append(SweepRecord.from_estimate(curve, result, secs))
        if family == "rectangle" and abs(eps - RECTANGLE_THRESHOLD) <= 1e-6:
            sq, lng = rectangle_branches(float(eps))
            notes.append(f"eps={fmt(eps)} near sqrt(3)/2: square_branch={fmt(sq)} long_branch={fmt(lng)}")
    return records, notes


@dataclass(frozen=True)
class LimitTable:
    eps: float
    deltas: tuple
    ratios: tuple
    gaps: tuple
    monotone: bool
    order: Optional[float]

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "rows": [
                {"delta": d, "ratio": r, "abs_gap": g}
                for d, r, g in zip(self.deltas, self.ratios, self.gaps)
            ],
            "monotone": self.monotone,
            "order": self.order,
        }


def limit_table(eps: float, delta_start: float, factor: float, count: int) -> LimitTable:
    """Corner family at geometrically shrinking delta, distance to sqrt(2), fitted order."""
    if not 0.0 < factor < 1.0:
        raise ValueError("factor must lie in (0, 1)")
    if count < 1:
        raise ValueError("count must be >= 1")
    deltas = [delta_start * factor**k for k in range(count)]
    ratios = [rectangle_limit_family(eps, d) for d in deltas]
    gaps = [abs(r - math.sqrt(2.0)) for r in ratios]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    order = None
    if count >= 2 and all(g > 0.0 for g in gaps):
        order = float(np.polyfit(np.log(deltas), np.log(gaps), 1)[0])
    return LimitTable(float(eps), tuple(deltas), tuple(ratios), tuple(gaps), monotone, order)


def open_case(curve: Curve, seeds: int, opts: OptimizeOptions, instability: float = 1e-5) -> dict:
    """Repeat the estimate under ``seeds`` consecutive rng seeds and report the spread."""
    if seeds < 1:
        raise ValueError("seeds must be >= 1")
    runs = []
    for k in range(seeds):
        o = replace(opts, rng_seed=opts.rng_seed + k)
        runs.append((o.rng_seed, estimate_ptolemy_constant(curve, o)))
    values = [r.value for _, r in runs]
    best_seed, best = max(runs, key=lambda sr: sr[1].value)
    spread = max(values) - min(values)
    out = {
        "curve": curve.label,
        "seeds": [s for s, _ in runs],
        "values": values,
        "statuses": [r.status.value for _, r in runs],
        "spread": spread,
        "unstable": spread > instability,
        "best_value": best.value,
        "best_argmax": list(best.argmax),
        "best_status": best.status.value,
        "best_seed": best_seed,
    }
    out.update(analytic_reference(curve))
    return out
