"""Numerical Ptolemy constants of planar closed curves."""

from .analytic import (
    BoundPair,
    ellipse_bounds,
    ellipse_constant,
    rectangle_constant,
    rectangle_limit_family,
)
from .curves import (
    ConvexPolygon,
    Ellipse,
    Point2,
    Rectangle,
    RegularPolygon,
    ReuleauxTriangle,
    is_strict_cyclic_order,
    parse_curve,
    point_at,
)
from .optimizer import (
    EstimateResult,
    OptimizeOptions,
    Status,
    estimate_ptolemy_constant,
    grid_search,
    refine_local,
)
from .ratio import (
    QuadParams,
    ellipse_hessian_closed_form,
    gradient_fd,
    hessian_fd,
    ptolemy_ratio,
    ratio_on_curve,
    second_derivative_test,
)

__version__ = "0.1.0"
