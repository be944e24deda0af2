"""Planar simple closed curves with a normalized boundary parameter.

Every curve maps a parameter ``t`` in ``[0, 1)`` (taken modulo 1) to a boundary
point, traversing the curve counterclockwise. The ellipse uses the angular
parameter ``theta = 2*pi*t``; all other curves use arc-length fraction from a
fixed start point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "Point2",
    "InvalidCurve",
    "InvalidEccentricity",
    "Curve",
    "Ellipse",
    "Rectangle",
    "RegularPolygon",
    "ReuleauxTriangle",
    "ConvexPolygon",
    "point_at",
    "points_at",
    "is_strict_cyclic_order",
    "parse_curve",
    "signed_area",
]


class InvalidCurve(ValueError):
    pass


class InvalidEccentricity(InvalidCurve):
    pass


class Point2(NamedTuple):
    x: float
    y: float


def _check_eccentricity(eps: float) -> float:
    eps = float(eps)
    if not (0.0 <= eps < 1.0):
        raise InvalidEccentricity(f"eccentricity must lie in [0, 1), got {eps!r}")
    return eps


class Curve:
    """Base class. Subclasses implement ``points`` on an array of parameters."""

    def points(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def label(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.label


class _Polyline(Curve):
    """Arc-length parameterization of a closed polygonal loop.

    ``_loop`` holds the loop vertices starting at the start point; the closing
    edge back to the first vertex is implicit.
    """

    _loop: np.ndarray
    _cum: np.ndarray
    _perimeter: float

    def _build(self, loop: np.ndarray) -> None:
        closed = np.vstack([loop, loop[:1]])
        seg = np.hypot(*np.diff(closed, axis=0).T)
        object.__setattr__(self, "_loop", closed)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(seg)]))
        object.__setattr__(self, "_perimeter", float(self._cum[-1]))

    @property
    def perimeter(self) -> float:
        return self._perimeter

    def points(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        s = t * self._perimeter
        idx = np.searchsorted(self._cum, s, side="right") - 1
        idx = np.minimum(np.maximum(idx, 0), len(self._cum) - 2)
        seg_len = self._cum[idx + 1] - self._cum[idx]
        frac = (s - self._cum[idx]) / seg_len
        p0 = self._loop[idx]
        p1 = self._loop[idx + 1]
        return p0 + frac[..., None] * (p1 - p0)

    def corner_params(self) -> np.ndarray:
        """Parameters of the loop vertices (including any start point on an edge)."""
        return self._cum[:-1] / self._perimeter


@dataclass(frozen=True)
class Ellipse(Curve):
    """``x**2 + y**2 / (1 - eps**2) = 1``, foci at ``(+-eps, 0)``."""

    eccentricity: float

    def __post_init__(self):
        object.__setattr__(self, "eccentricity", _check_eccentricity(self.eccentricity))

    @property
    def semi_minor(self) -> float:
        return math.sqrt(1.0 - self.eccentricity**2)

    def points(self, t):
        theta = 2.0 * np.pi * np.asarray(t, dtype=float)
        return np.stack([np.cos(theta), self.semi_minor * np.sin(theta)], axis=-1)

    @property
    def label(self) -> str:
        return f"ellipse:{self.eccentricity!r}"


@dataclass(frozen=True)
class Rectangle(_Polyline):
    """``max(|x|, |y| / sqrt(1 - eps**2)) = 1``, starting at ``(1, 0)``."""

    eccentricity: float

    def __post_init__(self):
        eps = _check_eccentricity(self.eccentricity)
        object.__setattr__(self, "eccentricity", eps)
        b = self.half_height
        self._build(np.array([[1.0, 0.0], [1.0, b], [-1.0, b], [-1.0, -b], [1.0, -b]]))

    @property
    def half_height(self) -> float:
        return math.sqrt(1.0 - self.eccentricity**2)

    @property
    def label(self) -> str:
        return f"rectangle:{self.eccentricity!r}"


@dataclass(frozen=True)
class RegularPolygon(_Polyline):
    """Regular n-gon with unit circumradius and a vertex at ``(1, 0)``."""

    sides: int

    def __post_init__(self):
        if int(self.sides) != self.sides or self.sides < 3:
            raise InvalidCurve(f"a regular polygon needs an integer n >= 3, got {self.sides!r}")
        object.__setattr__(self, "sides", int(self.sides))
        ang = 2.0 * np.pi * np.arange(self.sides) / self.sides
        self._build(np.stack([np.cos(ang), np.sin(ang)], axis=-1))

    @property
    def label(self) -> str:
        return f"polygon:{self.sides}"


@dataclass(frozen=True)
class ReuleauxTriangle(Curve):
    """Reuleaux triangle of width 2 centred on the centroid of its triangle.

    The boundary starts at the vertex on the positive x-axis. The arc from
    vertex k to vertex k+1 is centred at vertex k+2 and spans 60 degrees.
    """

    width: float = field(default=2.0, init=False)

    @property
    def vertices(self) -> np.ndarray:
        r = self.width / math.sqrt(3.0)
        ang = 2.0 * np.pi * np.arange(3) / 3.0
        return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)

    @property
    def perimeter(self) -> float:
        return math.pi * self.width

    def points(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        u = 3.0 * t
        k = np.minimum(np.floor(u).astype(int), 2)
        frac = u - k
        centres = self.vertices[(k + 2) % 3]
        # arc k leaves vertex k at polar angle 30 + 120k degrees about its centre
        phi = np.pi / 6.0 + 2.0 * np.pi * k / 3.0 + frac * np.pi / 3.0
        return centres + self.width * np.stack([np.cos(phi), np.sin(phi)], axis=-1)

    def corner_params(self) -> np.ndarray:
        return np.array([0.0, 1.0 / 3.0, 2.0 / 3.0])

    @property
    def label(self) -> str:
        return "reuleaux"


@dataclass(frozen=True)
class ConvexPolygon(_Polyline):
    """Strictly convex polygon, vertices listed counterclockwise."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(Point2(float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise InvalidCurve("a convex polygon needs at least 3 vertices")
        arr = np.array(verts)
        if not np.all(np.isfinite(arr)):
            raise InvalidCurve("polygon vertices must be finite")
        edges = np.roll(arr, -1, axis=0) - arr
        if np.any(np.hypot(*edges.T) == 0.0):
            raise InvalidCurve("polygon has repeated consecutive vertices")
        nxt = np.roll(edges, -1, axis=0)
        cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
        if np.any(cross <= 0.0):
            raise InvalidCurve("polygon must be strictly convex and counterclockwise")
        # turning number 1 rules out star-shaped self-intersecting loops
        turn = np.arctan2(cross, np.einsum("ij,ij->i", edges, nxt)).sum()
        if not math.isclose(turn, 2.0 * math.pi, abs_tol=1e-9):
            raise InvalidCurve("polygon winds more than once")
        object.__setattr__(self, "vertices", verts)
        self._build(arr)

    @property
    def label(self) -> str:
        return "convex:" + ";".join(f"{x!r},{y!r}" for x, y in self.vertices)


def points_at(curve: Curve, t) -> np.ndarray:
    """Vectorized boundary points; the trailing axis holds ``(x, y)``."""
    return curve.points(t)


def point_at(curve: Curve, t: float) -> Point2:
    x, y = curve.points(float(t))
    return Point2(float(x), float(y))


def is_strict_cyclic_order(t1: float, t2: float, t3: float, t4: float) -> bool:
    """True iff the parameters are distinct mod 1 and run counterclockwise t1->t2->t3->t4."""
    d2 = (t2 - t1) % 1.0
    d3 = (t3 - t1) % 1.0
    d4 = (t4 - t1) % 1.0
    return 0.0 < d2 < d3 < d4 < 1.0


def parse_curve(text: str) -> Curve:
    """Parse ``ellipse:EPS``, ``rectangle:EPS``, ``polygon:N``, ``reuleaux`` or
    ``convex:x1,y1;x2,y2;...``. Raises :class:`InvalidCurve` on malformed input."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "ellipse":
            return Ellipse(_finite(arg))
        if kind == "rectangle":
            return Rectangle(_finite(arg))
        if kind == "polygon":
            return RegularPolygon(int(arg))
        if kind == "reuleaux":
            if arg.strip():
                raise InvalidCurve("reuleaux takes no argument")
            return ReuleauxTriangle()
        if kind == "convex":
            verts = []
            for pair in arg.split(";"):
                xs, ys = pair.split(",")
                verts.append((_finite(xs), _finite(ys)))
            return ConvexPolygon(tuple(verts))
    except InvalidCurve:
        raise
    except (ValueError, TypeError) as exc:
        raise InvalidCurve(f"cannot parse curve {text!r}: {exc}") from exc
    raise InvalidCurve(f"unknown curve kind {kind!r} in {text!r}")


def _finite(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {s!r}")
    return v


def signed_area(pts: Sequence) -> float:
    """Shoelace area of a closed polygon; positive when counterclockwise."""
    p = np.asarray(pts, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
