"""Ptolemy ratio of four points and finite-difference derivative checks."""

from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

from .curves import Curve, Ellipse, is_strict_cyclic_order

__all__ = [
    "DegenerateQuadrilateral",
    "StepTooLarge",
    "InvalidQuad",
    "QuadParams",
    "ptolemy_ratio",
    "ptolemy_ratio_batch",
    "ratio_on_curve",
    "gradient_fd",
    "hessian_fd",
    "ellipse_hessian_closed_form",
    "jacobi_eigenvalues",
    "Critical",
    "second_derivative_test",
    "fd_noise_floor",
    "CRITICAL_POINT",
]

# (0, pi/2, pi, 3pi/2) on the ellipse
CRITICAL_POINT = (0.0, 0.25, 0.5, 0.75)


class DegenerateQuadrilateral(ArithmeticError):
    def __init__(self, diagonal: str):
        super().__init__(f"diagonal {diagonal} has zero length")
        self.diagonal = diagonal


class StepTooLarge(ValueError):
    pass


class InvalidQuad(ValueError):
    pass


class QuadParams(tuple):
    """Four boundary parameters in strict counterclockwise cyclic order."""

    __slots__ = ()

    def __new__(cls, t1, t2=None, t3=None, t4=None):
        vals = tuple(t1) if t2 is None else (t1, t2, t3, t4)
        vals = tuple(float(v) for v in vals)
        if len(vals) != 4 or not is_strict_cyclic_order(*vals):
            raise InvalidQuad(f"parameters {vals} are not in strict cyclic order")
        return super().__new__(cls, vals)

    def gaps(self) -> tuple[float, float, float, float]:
        t1, t2, t3, t4 = self
        return ((t2 - t1) % 1.0, (t3 - t2) % 1.0, (t4 - t3) % 1.0, (t1 - t4) % 1.0)


def _dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def ptolemy_ratio(a, b, c, d) -> float:
    """(|ab||cd| + |ad||bc|) / (|ac||bd|).

    Raises :class:`DegenerateQuadrilateral` if either diagonal vanishes.
    """
    ac = _dist(a, c)
    if ac == 0.0:
        raise DegenerateQuadrilateral("ac")
    bd = _dist(b, d)
    if bd == 0.0:
        raise DegenerateQuadrilateral("bd")
    return (_dist(a, b) * _dist(c, d) + _dist(a, d) * _dist(b, c)) / (ac * bd)


def ptolemy_ratio_batch(pts: np.ndarray) -> np.ndarray:
    """Ratio for an array of shape ``(..., 4, 2)``; NaN where a diagonal vanishes."""
    pts = np.asarray(pts, dtype=float)
    a, b, c, d = (pts[..., i, :] for i in range(4))

    def dist(p, q):
        return np.hypot(p[..., 0] - q[..., 0], p[..., 1] - q[..., 1])

    den = dist(a, c) * dist(b, d)
    num = dist(a, b) * dist(c, d) + dist(a, d) * dist(b, c)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.nan)


def ratio_on_curve(curve: Curve, q: Sequence[float]) -> float:
    pts = curve.points(np.asarray(q, dtype=float))
    return ptolemy_ratio(*pts)


def _coordinate_scale(curve: Curve) -> float:
    # derivatives are taken in radians on the ellipse, in t elsewhere
    return 2.0 * math.pi if isinstance(curve, Ellipse) else 1.0


def _prepare(curve: Curve, q, h: float):
    if not h > 0.0:
        raise StepTooLarge(f"step must be positive, got {h!r}")
    q = QuadParams(q)
    scale = _coordinate_scale(curve)
    # stencils reach 2h (in the derivative's own units) to either side
    if min(q.gaps()) <= 2.0 * h / scale:
        raise StepTooLarge(f"step {h} too large for cyclic gaps {q.gaps()}")
    x0 = np.array(q) * scale

    def f(x):
        return ratio_on_curve(curve, np.asarray(x) / scale)

    return f, x0


def gradient_fd(curve: Curve, q, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of the ratio with respect to the four parameters.

    On an ellipse the coordinates are the angles ``theta_k = 2*pi*t_k`` and
    ``h`` is measured in radians; on other curves both are in t-units.
    """
    f, x0 = _prepare(curve, q, h)
    g = np.empty(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        g[i] = (f(x0 + e) - f(x0 - e)) / (2.0 * h)
    return g


def hessian_fd(curve: Curve, q, h: float = 1e-3) -> np.ndarray:
    """Second-order central-difference Hessian, symmetrized. Units as in :func:`gradient_fd`."""
    f, x0 = _prepare(curve, q, h)
    f0 = f(x0)
    eye = np.eye(4) * h
    H = np.empty((4, 4))
    for i in range(4):
        H[i, i] = (f(x0 + eye[i]) - 2.0 * f0 + f(x0 - eye[i])) / h**2
        for j in range(i + 1, 4):
            H[i, j] = (
                f(x0 + eye[i] + eye[j])
                - f(x0 + eye[i] - eye[j])
                - f(x0 - eye[i] + eye[j])
                + f(x0 - eye[i] - eye[j])
            ) / (4.0 * h**2)
            H[j, i] = H[i, j]
    return 0.5 * (H + H.T)


def ellipse_hessian_closed_form(eps: float) -> np.ndarray:
    """Hessian of the ratio at (0, pi/2, pi, 3pi/2) on the ellipse, in radians."""
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eccentricity must lie in [0, 1), got {eps!r}")
    e2 = eps * eps
    pref = -(e2 * e2) / (8.0 * math.sqrt(1.0 - e2))
    odd_diag = (3.0 - e2) / (2.0 - e2)
    odd_off = (1.0 - e2) / (2.0 - e2)
    even_den = (2.0 - e2) * (1.0 - e2)
    even_diag = (3.0 - 2.0 * e2) / even_den
    even_off = 1.0 / even_den
    M = np.array(
        [
            [odd_diag, 0.0, odd_off, 0.0],
            [0.0, even_diag, 0.0, even_off],
            [odd_off, 0.0, odd_diag, 0.0],
            [0.0, even_off, 0.0, even_diag],
        ]
    )
    return pref * M


def jacobi_eigenvalues(A, tol: float = 1e-13, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol`` times the Frobenius norm of the input.
    """
    a = np.array(A, dtype=float)
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-100 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


class Critical(str, enum.Enum):
    MAXIMUM = "Maximum"
    MINIMUM = "Minimum"
    SADDLE = "Saddle"
    INCONCLUSIVE = "Inconclusive"


def fd_noise_floor(value: float, h: float) -> float:
    """Roundoff level of a second-difference quotient of a function of size ``value``."""
    return 64.0 * np.finfo(float).eps * max(abs(value), 1.0) / h**2


def second_derivative_test(H, noise: float = 0.0) -> Critical:
    """Classify a critical point from the signs of the Hessian eigenvalues.

    Eigenvalues within ``max(1e-10 * max|H|, 1e-14, noise)`` of zero count as
    zero; pass :func:`fd_noise_floor` as ``noise`` for finite-difference input.
    """
    H = np.asarray(H, dtype=float)
    tau = max(1e-10 * float(np.max(np.abs(H))), 1e-14, noise)
    lam = jacobi_eigenvalues(H)
    if np.all(lam < -tau):
        return Critical.MAXIMUM
    if np.all(lam > tau):
        return Critical.MINIMUM
    if np.any(lam < -tau) and np.any(lam > tau):
        return Critical.SADDLE
    return Critical.INCONCLUSIVE
