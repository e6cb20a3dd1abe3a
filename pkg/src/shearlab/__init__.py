"""Shear coordinates on punctured hyperbolic surfaces."""

from .errors import GeometryError, ValidationError
from .moebius import (
    MobiusMap,
    BoundaryPoint,
    INFINITY,
    compose,
    trace_to_length,
    parabolic_fixed_point,
    cross_ratio_shear,
    trace_product_parabolics,
)
from .triangulation import (
    IdealTriangulation,
    CurveOnSurface,
    LRSequence,
    build_surface,
    builtin_names,
    builtin_curve,
    lr_word,
    reroute_through_flip,
    random_surface,
    random_curve,
)
from .shear import (
    ShearVector,
    HolonomyWordResult,
    basic_matrix_P,
    basic_matrix_H,
    basic_matrix_V,
    holonomy_of_word,
    curve_length,
    check_complete,
    completeness_matrix,
    puncture_word,
    flip_shears,
    shear_from_four_lengths,
    random_complete_shears,
    make_incomplete,
)

__version__ = "0.1.0"
