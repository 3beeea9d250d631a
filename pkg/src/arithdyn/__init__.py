"""Canonical heights, local heights, and transfinite diameters of
polynomial dynamical systems over Q."""

from .places import (
    LogAbs,
    Place,
    Rational,
    log_abs,
    log_abs_exact_arch,
    product_formula_check,
    relevant_places,
)
from .polyq import (
    GaloisSet,
    RatPoly,
    compose,
    discriminant_pairproduct,
    iterate,
    parse_poly,
    periodic_set,
    preimage_set,
    pushforward,
    resultant,
    squarefree_part,
)
from .roots import ComplexApprox, NewtonPolygon, complex_roots, newton_polygon, sum_log_plus
from .heights import (
    DynSystem,
    HeightValue,
    adelic_capacity_log_sum,
    canonical_height,
    escape_valuation_threshold,
    has_good_reduction,
    is_preperiodic_rational,
    local_height_arch,
    local_height_padic,
    log_capacity,
    mahler_height,
    naive_height,
)
from .capacity import (
    CapacityEstimate,
    Lemniscate,
    capacity_bracket,
    chebyshev_upper,
    discrete_energy,
    lemniscate_capacity,
    lemniscate_chain,
    leja_points,
    pairwise_distance_log,
    pairwise_geomean_arch,
)
from .equidist import (
    SetSequence,
    arch_distribution_stats,
    equidistribution_report,
    escape_sublevel_capacity,
    escape_sublevel_membership,
    partition_by_local_height,
    periodic_point_discriminant_identity,
)
from .symmetry import (
    AffineMap,
    GaussRational,
    centroid,
    is_julia_symmetry,
    rotation_symmetry_order,
)
from .mandelbrot import (
    GreenLemniscate,
    critical_orbit_poly,
    green_value,
    mandelbrot_capacity_partial,
    mandelbrot_escape_rate,
    mandelbrot_height,
)

__version__ = "0.1.0"
