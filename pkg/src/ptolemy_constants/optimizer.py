"""Global estimation of the Ptolemy constant of a curve.

Exhaustive grid seeding, clamped Nelder-Mead refinement on gap coordinates, and
linear extrapolation when the supremum is only approached as boundary points
coalesce.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .curves import Curve, is_strict_cyclic_order
from .ratio import DegenerateQuadrilateral, QuadParams, ptolemy_ratio, ptolemy_ratio_batch

__all__ = [
    "SplitMix64",
    "OptimizeOptions",
    "Status",
    "Extrapolation",
    "EstimateResult",
    "InvalidSeed",
    "NumericalFailure",
    "grid_search",
    "grid_table",
    "nelder_mead_max",
    "refine_local",
    "estimate_ptolemy_constant",
]

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood); fully specified so runs reproduce anywhere."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53


class InvalidSeed(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizeOptions:
    grid_points: int = 48
    starts: int = 16
    max_iterations: int = 2000
    value_tolerance: float = 1e-12
    gap_floor: float = 1e-9
    rng_seed: int = 0

    def __post_init__(self):
        if self.grid_points < 8:
            raise ValueError("grid_points must be >= 8")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if not self.gap_floor > 0.0:
            raise ValueError("gap_floor must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


class Status(str, enum.Enum):
    INTERIOR_MAXIMUM = "InteriorMaximum"
    DEGENERATE_LIMIT = "DegenerateLimit"
    GRID_ONLY = "GridOnly"


@dataclass(frozen=True)
class Extrapolation:
    active_gaps: tuple
    gaps: tuple
    values: tuple
    limit: float
    slope: float
    residual: float


@dataclass(frozen=True)
class EstimateResult:
    value: float
    argmax: QuadParams
    status: Status
    grid_best: float
    refinements_run: int
    extrapolation_detail: Optional[Extrapolation] = None
    failed_refinements: int = 0

    def to_dict(self) -> dict:
        d = {
            "value": self.value,
            "argmax": list(self.argmax),
            "status": self.status.value,
            "grid_best": self.grid_best,
            "refinements_run": self.refinements_run,
            "failed_refinements": self.failed_refinements,
            "extrapolation_detail": None,
        }
        if self.extrapolation_detail is not None:
            ex = self.extrapolation_detail
            d["extrapolation_detail"] = {
                "active_gaps": list(ex.active_gaps),
                "gaps": list(ex.gaps),
                "values": list(ex.values),
                "limit": ex.limit,
                "slope": ex.slope,
                "residual": ex.residual,
            }
        return d


def canonical_rotation(t) -> QuadParams:
    """Rotate a cyclic tuple so its smallest parameter comes first."""
    t = [float(v) % 1.0 for v in t]
    k = int(np.argmin(t))
    return QuadParams(t[k:] + t[:k])


# ---------------------------------------------------------------------------
# grid oracle


def grid_table(curve: Curve, n: int):
    """All 4-subsets of ``{k/n}`` in increasing order with their ratios.

    Returns ``(index_tuples, values)``; degenerate evaluations are NaN.
    """
    if n < 8:
        raise ValueError("grid resolution must be >= 8")
    combos = np.array(list(combinations(range(n), 4)), dtype=np.int64)
    pts = curve.points(np.arange(n) / n)
    return combos, ptolemy_ratio_batch(pts[combos])


def grid_search(curve: Curve, n: int) -> tuple[float, QuadParams]:
    combos, vals = grid_table(curve, n)
    if np.all(np.isnan(vals)):
        raise NumericalFailure("every grid evaluation was degenerate")
    i = int(np.nanargmax(vals))
    return float(vals[i]), QuadParams(combos[i] / n)


# ---------------------------------------------------------------------------
# gap coordinates (t1, g1, g2, g3); g4 = 1 - g1 - g2 - g3


def _to_reduced(q) -> np.ndarray:
    g = QuadParams(q).gaps()
    return np.array([q[0], g[0], g[1], g[2]])


def _to_params(x) -> tuple:
    t1, g1, g2, g3 = x
    return (t1 % 1.0, (t1 + g1) % 1.0, (t1 + g1 + g2) % 1.0, (t1 + g1 + g2 + g3) % 1.0)


def _clamp(x: np.ndarray, floor: float) -> np.ndarray:
    """Project the gaps onto ``{g >= floor, g1 + g2 + g3 <= 1 - floor}``."""
    x = np.array(x, dtype=float)
    g = np.maximum(x[1:], floor)
    budget = 1.0 - 4.0 * floor
    y = g - floor
    if y.sum() > budget:
        # Euclidean projection of y onto the simplex {y >= 0, sum y = budget}
        u = np.sort(y)[::-1]
        css = np.cumsum(u)
        k = np.arange(1, len(u) + 1)
        rho = np.nonzero(u * k > css - budget)[0][-1]
        shift = (css[rho] - budget) / (rho + 1.0)
        y = np.maximum(y - shift, 0.0)
        g = y + floor
    x[1:] = g
    return x


def _objective(curve: Curve) -> Callable[[np.ndarray], float]:
    def f(x):
        pts = curve.points(np.array(_to_params(x)))
        try:
            return ptolemy_ratio(*pts)
        except DegenerateQuadrilateral:
            return -math.inf

    return f


# ---------------------------------------------------------------------------
# Nelder-Mead


def nelder_mead_max(
    f: Callable[[np.ndarray], float],
    x0,
    step: float,
    project: Callable[[np.ndarray], np.ndarray] = lambda x: x,
    tol: float = 1e-12,
    max_iterations: int = 2000,
    xtol: float = 1e-15,
) -> tuple[np.ndarray, float, int]:
    """Maximize ``f`` by the Nelder-Mead simplex method.

    Every trial point passes through ``project`` before evaluation. Stops when
    the spread of simplex values drops below ``tol``, the simplex shrinks below
    ``xtol`` in every coordinate, or after ``max_iterations`` iterations.
    Returns ``(x_best, f_best, iterations)``.
    """
    x0 = project(np.asarray(x0, dtype=float))
    n = len(x0)
    simplex = [x0]
    for i in range(n):
        v = x0.copy()
        v[i] += step
        simplex.append(project(v))
    simplex = np.array(simplex)
    vals = np.array([f(v) for v in simplex])

    it = 0
    for it in range(1, max_iterations + 1):
        order = np.argsort(-vals, kind="stable")
        simplex, vals = simplex[order], vals[order]
        if vals[0] - vals[-1] < tol or np.max(np.abs(simplex[1:] - simplex[0])) < xtol:
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = project(centroid + (centroid - worst))
        fr = f(xr)
        if fr > vals[0]:
            xe = project(centroid + 2.0 * (centroid - worst))
            fe = f(xe)
            if fe > fr:
                simplex[-1], vals[-1] = xe, fe
            else:
                simplex[-1], vals[-1] = xr, fr
            continue
        if fr > vals[-2]:
            simplex[-1], vals[-1] = xr, fr
            continue
        if fr > vals[-1]:
            xc = project(centroid + 0.5 * (xr - centroid))
        else:
            xc = project(centroid + 0.5 * (worst - centroid))
        fc = f(xc)
        if fc > max(fr, vals[-1]):
            simplex[-1], vals[-1] = xc, fc
            continue
        best = simplex[0]
        for i in range(1, n + 1):
            simplex[i] = project(best + 0.5 * (simplex[i] - best))
            vals[i] = f(simplex[i])
    i = int(np.argmax(vals))
    return simplex[i], float(vals[i]), it


# ---------------------------------------------------------------------------
# degenerate-limit handling


_COLLAPSED = 1e3


def _clusters(active: list[bool]) -> list[list[int]]:
    """Maximal cyclic runs of points joined by active gaps (gap i joins point i to i+1)."""
    if all(active):
        raise NumericalFailure("all four gaps collapsed")
    start = active.index(False) + 1
    runs, cur = [], [start % 4]
    for k in range(start, start + 4):
        i = k % 4
        if active[i]:
            cur.append((i + 1) % 4)
        else:
            if len(cur) > 1:
                runs.append(cur)
            cur = [(i + 1) % 4]
    return runs


def _shrink_ray(t, clusters) -> Callable[[float], np.ndarray]:
    """Parameters with every cluster scaled about its centre so its largest gap is ``delta``."""
    t = np.asarray(t, dtype=float)
    plans = []
    for run in clusters:
        offs = np.concatenate([[0.0], np.cumsum([(t[b] - t[a]) % 1.0 for a, b in zip(run, run[1:])])])
        m = len(run)
        centre = offs[m // 2] if m % 2 else 0.5 * (offs[m // 2 - 1] + offs[m // 2])
        rel = offs - centre
        big = max(offs[1:] - offs[:-1])
        plans.append((run, t[run[0]] + centre, rel / big))

    def at(delta: float) -> np.ndarray:
        out = t.copy()
        for run, anchor, unit in plans:
            out[run] = (anchor + unit * delta) % 1.0
        return out

    return at


def _extrapolate(curve: Curve, t, active: list[bool], floor: float):
    """Fit ``value(delta) = L - m*delta`` along the shrinking-gap ray.

    Returns ``(detail, t_at_floor)``, or ``None`` when the ratio does not grow
    as the active gaps shrink.
    """
    ray = _shrink_ray(t, _clusters(active))

    def value(delta):
        return ptolemy_ratio(*curve.points(ray(delta)))

    deltas = np.array([floor * 2.0**k for k in range(10, -1, -1)])
    vals = np.array([value(d) for d in deltas])
    slope_all = np.polyfit(deltas, vals, 1)[0]
    if not (slope_all < 0.0 and vals[-1] > vals[0]):
        return None
    small_d, small_v = deltas[-5:], vals[-5:]
    coef, res, *_ = np.polyfit(small_d, small_v, 1, full=True)
    slope, limit = float(coef[0]), float(coef[1])
    residual = math.sqrt(float(res[0]) / 5.0) if len(res) else 0.0
    detail = Extrapolation(
        active_gaps=tuple(i + 1 for i, a in enumerate(active) if a),
        gaps=tuple(float(d) for d in deltas),
        values=tuple(float(v) for v in vals),
        limit=limit,
        slope=-slope,
        residual=residual,
    )
    return detail, ray(floor)


# ---------------------------------------------------------------------------
# local refinement and global estimate


def refine_local(
    curve: Curve,
    seed,
    opts: OptimizeOptions = OptimizeOptions(),
    grid_best: float = math.nan,
    step: Optional[float] = None,
) -> EstimateResult:
    """Clamped Nelder-Mead ascent of the ratio from ``seed``, then one restart at scale 1e-4."""
    try:
        seed = QuadParams(seed)
    except ValueError as exc:
        raise InvalidSeed(str(exc)) from exc
    floor = opts.gap_floor
    f = _objective(curve)

    def project(x):
        return _clamp(x, floor)

    if step is None:
        step = 0.5 / opts.grid_points
    x, fx, _ = nelder_mead_max(f, _to_reduced(seed), step, project, opts.value_tolerance, opts.max_iterations)
    x2, fx2, _ = nelder_mead_max(f, x, 1e-4, project, opts.value_tolerance, opts.max_iterations)
    if fx2 >= fx:
        x, fx = x2, fx2
    if not math.isfinite(fx):
        raise NumericalFailure("refinement never reached a nondegenerate quadrilateral")

    t = np.array(_to_params(x))
    gaps = [x[1], x[2], x[3], 1.0 - x[1] - x[2] - x[3]]
    # simplex steps stall a little above the floor, so "driven to the floor" is read loosely
    active = [g <= _COLLAPSED * floor for g in gaps]
    status, detail, value = Status.INTERIOR_MAXIMUM, None, fx
    if any(active):
        fit = _extrapolate(curve, t, active, floor)
        if fit is not None:
            detail, t = fit
            status = Status.DEGENERATE_LIMIT
            value = detail.limit
    return EstimateResult(
        value=float(value),
        argmax=canonical_rotation(t),
        status=status,
        grid_best=grid_best,
        refinements_run=1,
        extrapolation_detail=detail,
    )


def _distinct_grid_seeds(combos: np.ndarray, vals: np.ndarray, n: int, k: int) -> list[np.ndarray]:
    """Best ``k`` grid tuples pairwise more than 2/n apart (L-infinity, reduced coordinates)."""
    order = np.argsort(-np.nan_to_num(vals, nan=-np.inf), kind="stable")
    t = combos / n
    reduced = np.column_stack([t[:, 0], t[:, 1] - t[:, 0], t[:, 2] - t[:, 1], t[:, 3] - t[:, 2]])
    chosen: list[int] = []
    radius = 2.0 / n
    for i in order:
        if np.isnan(vals[i]):
            break
        if chosen:
            d = np.abs(reduced[chosen] - reduced[i])
            d[:, 0] = np.minimum(d[:, 0], 1.0 - d[:, 0])
            if np.any(d.max(axis=1) <= radius):
                continue
        chosen.append(int(i))
        if len(chosen) == k:
            break
    return [t[i] for i in chosen]


def _random_seeds(rng: SplitMix64, k: int, floor: float) -> list[tuple]:
    seeds = []
    while len(seeds) < k:
        t = sorted(rng.uniform() for _ in range(4))
        if is_strict_cyclic_order(*t) and min(QuadParams(t).gaps()) > floor:
            seeds.append(tuple(t))
    return seeds


def _better(a: EstimateResult, b: Optional[EstimateResult]) -> bool:
    if b is None:
        return True
    if a.value != b.value:
        return a.value > b.value
    return tuple(a.argmax) < tuple(b.argmax)


def estimate_ptolemy_constant(curve: Curve, opts: OptimizeOptions = OptimizeOptions()) -> EstimateResult:
    """Estimate sup of the ratio over ordered quadruples on ``curve``.

    Refines the ``opts.starts`` best distinct grid tuples and ``opts.starts``
    random tuples; the best refinement wins, ties going to the
    lexicographically smallest argmax. Deterministic for fixed inputs.
    """
    n = opts.grid_points
    combos, vals = grid_table(curve, n)
    if np.all(np.isnan(vals)):
        raise NumericalFailure("every grid evaluation was degenerate")
    gi = int(np.nanargmax(vals))
    grid_best = float(vals[gi])
    grid_arg = QuadParams(combos[gi] / n)

    seeds = _distinct_grid_seeds(combos, vals, n, opts.starts)
    seeds += _random_seeds(SplitMix64(opts.rng_seed), opts.starts, opts.gap_floor)

    best: Optional[EstimateResult] = None
    failed = 0
    for s in seeds:
        try:
            r = refine_local(curve, s, opts, grid_best=grid_best)
        except (NumericalFailure, FloatingPointError, ValueError):
            failed += 1
            continue
        if _better(r, best):
            best = r
    if best is None:
        return EstimateResult(grid_best, grid_arg, Status.GRID_ONLY, grid_best, 0, None, failed)
    return EstimateResult(
        value=best.value,
        argmax=best.argmax,
        status=best.status,
        grid_best=grid_best,
        refinements_run=len(seeds) - failed,
        extrapolation_detail=best.extrapolation_detail,
        failed_refinements=failed,
    )
