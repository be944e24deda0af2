"""Closed-form Ptolemy constants, the ellipse bound pair and the rectangle limit family."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .curves import InvalidEccentricity, Point2

__all__ = [
    "BoundPair",
    "InvalidDelta",
    "RECTANGLE_THRESHOLD",
    "ellipse_constant",
    "ellipse_bounds",
    "rectangle_constant",
    "rectangle_branches",
    "rectangle_limit_vertices",
    "rectangle_limit_family",
]

# eccentricity of the 2x1 rectangle, where the rectangle constant changes branch
RECTANGLE_THRESHOLD = math.sqrt(3.0) / 2.0


class InvalidDelta(ValueError):
    pass


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float


def _semi_minor(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise InvalidEccentricity(f"eccentricity must lie in [0, 1), got {eps!r}")
    return math.sqrt(1.0 - eps * eps)


def ellipse_constant(eps: float) -> float:
    """(2 - eps^2) / (2 sqrt(1 - eps^2))."""
    b = _semi_minor(eps)
    return (2.0 - eps * eps) / (2.0 * b)


def ellipse_bounds(eps: float) -> BoundPair:
    b = _semi_minor(eps)
    lower = 0.5 * (1.0 / b + b)
    upper = 1.0 / math.sin(math.pi * b / 2.0)
    return BoundPair(lower, upper)


def rectangle_branches(eps: float) -> tuple[float, float]:
    """Values of the two branches of the rectangle law: (sqrt(2), sqrt(1+4b^2)/(2b))."""
    b = _semi_minor(eps)
    return math.sqrt(2.0), math.sqrt(1.0 + 4.0 * b * b) / (2.0 * b)


def rectangle_constant(eps: float) -> float:
    square_branch, long_branch = rectangle_branches(eps)
    return square_branch if eps <= RECTANGLE_THRESHOLD else long_branch


def _check_family(eps: float, delta: float) -> float:
    b = _semi_minor(eps)
    if eps > RECTANGLE_THRESHOLD:
        raise InvalidEccentricity(
            f"the corner family needs eps <= sqrt(3)/2, got {eps!r}"
        )
    delta = float(delta)
    if not 0.0 < delta <= min(2.0, 2.0 * b):
        raise InvalidDelta(f"delta must lie in (0, {min(2.0, 2.0 * b)}], got {delta!r}")
    return b


def rectangle_limit_vertices(eps: float, delta: float) -> tuple[Point2, Point2, Point2, Point2]:
    """Corner configuration whose ratio tends to sqrt(2) as delta -> 0+."""
    b = _check_family(eps, delta)
    return (
        Point2(1.0, b),
        Point2(-1.0, delta - b),
        Point2(-1.0, -b),
        Point2(delta - 1.0, -b),
    )


def rectangle_limit_family(eps: float, delta: float) -> float:
    """Ratio of :func:`rectangle_limit_vertices`, with the common factor delta cancelled."""
    b = _check_family(eps, delta)
    num = math.sqrt(4.0 + (delta - 2.0 * b) ** 2) + math.sqrt((delta - 2.0) ** 2 + 4.0 * b * b)
    return num / (math.sqrt(4.0 + 4.0 * b * b) * math.sqrt(2.0))
