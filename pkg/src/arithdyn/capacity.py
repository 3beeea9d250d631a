"""Transfinite diameters.

Exact formulas for discs and lemniscates, pullback chains with their exact
geometric rates, normalized discriminant diameters of Galois sets, and the
numerical bracket machinery: greedy Leja configurations from below,
monic sup-norm certificates from above, discrete energy.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CoincidentPointsWarning
from .heights import DynSystem, log_capacity
from .places import LogAbs, Place, log_abs
from .polyq import GaloisSet, RatPoly, resultant
from .roots import ComplexApprox


@dataclass(frozen=True)
class Lemniscate:
    """The sublevel region {|P(z)|_v <= R}; log R must be in the value
    group (a rational multiple of log p at finite places)."""

    poly: RatPoly
    radius_log: LogAbs
    place: Place

    def __post_init__(self):
        if self.poly.degree < 1:
            raise ValueError("need deg P >= 1")


@dataclass(frozen=True)
class CapacityEstimate:
    lower: float | None
    upper: float | None
    exact: LogAbs | None
    n_points: int

    def __post_init__(self):
        if self.lower is not None and self.upper is not None:
            if self.lower > self.upper + 1e-12:
                raise ValueError("lower exceeds upper")

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact.to_json() if self.exact is not None else None,
            "n_points": self.n_points,
        }


def _as_complex_array(points) -> np.ndarray:
    vals = [
        p.value if isinstance(p, ComplexApprox) else complex(p) for p in points
    ]
    return np.array(vals, dtype=complex)


def _log_distance_sum(z: np.ndarray) -> tuple[float, bool]:
    """Sum over ordered pairs of log|x - y|; flags coincident points."""
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    a = np.abs(diff)
    if np.any(a == 0.0):
        return -math.inf, True
    np.fill_diagonal(a, 1.0)
    return 2.0 * float(np.sum(np.log(a[np.triu_indices(len(z), k=1)]))), False


def pairwise_geomean_arch(points) -> float:
    """Geometric mean of pairwise distances over ordered pairs:
    exp((1/(N(N-1))) sum_{i != j} log|x_i - x_j|).  Coincident points give
    0.0 with a CoincidentPointsWarning."""
    z = _as_complex_array(points)
    n = len(z)
    if n < 2:
        raise ValueError("need two points")
    s, coincident = _log_distance_sum(z)
    if coincident:
        warnings.warn("coincident points", CoincidentPointsWarning)
        return 0.0
    return math.exp(s / (n * (n - 1)))


def discrete_energy(points) -> float:
    """Off-diagonal discrete logarithmic energy
    -(1/(N(N-1))) sum_{i != j} log|x_i - x_j|; +inf (with a warning) for
    coincident points."""
    z = _as_complex_array(points)
    n = len(z)
    if n < 2:
        raise ValueError("need two points")
    s, coincident = _log_distance_sum(z)
    if coincident:
        warnings.warn("coincident points", CoincidentPointsWarning)
        return math.inf
    return -s / (n * (n - 1))


@functools.lru_cache(maxsize=64)
def _pairproduct_cached(poly: RatPoly) -> Fraction:
    n = poly.degree
    return resultant(poly, poly.derivative()) / poly.leading ** (2 * n - 1)


def pairwise_distance_log(S: GaloisSet, v: Place) -> LogAbs:
    """Normalized log-diameter of S at v:
    (1/(N(N-1))) log |Delta|_v for Delta the ordered-pair product.

    Exact (a rational multiple of log p) at finite places; a float at the
    archimedean place, computed from the exact rational Delta."""
    n = S.cardinality
    if n < 2:
        raise ValueError("need two points")
    delta = _pairproduct_cached(S.poly)
    norm = Fraction(1, n * (n - 1))
    if v.is_arch:
        val = math.log(abs(delta.numerator)) - math.log(delta.denominator)
        return LogAbs.from_float(val * float(norm))
    return log_abs(delta, v) * norm


def lemniscate_capacity(L: Lemniscate) -> LogAbs:
    """log of the transfinite diameter of {|P| <= R}:
    (1/d)(log R - log|lead P|_v).  Exact where the inputs are exact."""
    d = L.poly.degree
    return (L.radius_log - log_abs(L.poly.leading, L.place)) * Fraction(1, d)


def lemniscate_chain(
    sys: DynSystem, v: Place, r0_log: LogAbs, n: int
) -> list[CapacityEstimate]:
    """Capacities of the pullback chain F_k = phi^-k(F_0) for a disc F_0
    of radius R0 (at least the escape radius):
    log c(F_k) = d^-k log R0 - (sum_{j<=k} d^-j) log|a_d|_v,
    monotone decreasing to -(1/(d-1)) log|a_d|_v."""
    d = sys.d
    la = log_abs(sys.leading, v)
    out = []
    geom = Fraction(0)
    for k in range(n + 1):
        dk = Fraction(1, d**k)
        logc = r0_log * dk - la * geom
        val = math.exp(logc.to_float())
        out.append(CapacityEstimate(val, val, logc, k))
        geom += Fraction(1, d ** (k + 1))
    return out


def chain_limit(sys: DynSystem, v: Place) -> LogAbs:
    """The limit of the pullback chain: the filled-Julia-set capacity."""
    return log_capacity(sys, v)


# ---------------------------------------------------------------------------
# Numerical brackets: Leja points from below, Chebyshev norms from above
# ---------------------------------------------------------------------------


def leja_points(boundary_samples, n: int) -> list[ComplexApprox]:
    """Greedy Leja sequence from the samples: the first point has maximal
    modulus, each next maximizes the product of distances to the chosen
    ones.  Ties break to the smallest sample index."""
    z = _as_complex_array(boundary_samples)
    if n > len(z):
        raise ValueError("n exceeds the sample count")
    if n < 1:
        raise ValueError("n must be positive")
    chosen = [int(np.argmax(np.abs(z)))]
    logdist = np.full(len(z), 0.0)
    for _ in range(n - 1):
        with np.errstate(divide="ignore"):
            logdist += np.log(np.abs(z - z[chosen[-1]]))
        logdist[chosen] = -np.inf
        chosen.append(int(np.argmax(logdist)))
    return [ComplexApprox(float(z[i].real), float(z[i].imag), 0.0) for i in chosen]


def leja_running_geomeans(points) -> list[float]:
    """Pairwise geometric-mean diameters of the prefixes of a Leja
    sequence (k = 2..n); nonincreasing for well-spread configurations."""
    z = _as_complex_array(points)
    out = []
    logsum = 0.0
    for k in range(1, len(z)):
        logsum += 2.0 * float(np.sum(np.log(np.abs(z[:k] - z[k]))))
        m = k + 1
        out.append(math.exp(logsum / (m * (m - 1))))
    return out


def leja_capacity_lower(points) -> float:
    """Heuristic lower estimate of the capacity from a Leja configuration.

    The n-point diameter of a set exceeds its capacity by a model bias:
    exactly n^(1/(n-1)) for a disc (realized by roots of unity), about
    (1.8 n)^(1/(n-1)) for an interval.  Dividing the final running geomean
    by (2n)^(1/(n-1)) over-corrects slightly for both model sets, keeping
    the estimate on the low side of the capacity."""
    g = leja_running_geomeans(points)
    n = len(_as_complex_array(points))
    return g[-1] * (2.0 * n) ** (-1.0 / (n - 1))


def chebyshev_upper(boundary_samples, monic_poly: RatPoly) -> float:
    """(max over samples of |P|)^(1/deg P) for monic P: an upper-bound
    certificate for the capacity of the sampled set, up to sampling
    density."""
    if not monic_poly.is_monic:
        raise ValueError("chebyshev_upper needs a monic polynomial")
    z = _as_complex_array(boundary_samples)
    coeffs = np.array([float(c) for c in monic_poly.coeffs], dtype=complex)
    p = np.zeros_like(z)
    for c in coeffs[::-1]:
        p = p * z + c
    m = float(np.max(np.abs(p)))
    return m ** (1.0 / monic_poly.degree)


def min_sample_gap(boundary_samples) -> float:
    """Minimum pairwise distance of the samples: the honest quality metric
    for sampling density."""
    z = _as_complex_array(boundary_samples)
    diff = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(np.min(diff))


def capacity_bracket(
    boundary_samples, n: int, monic_poly: RatPoly
) -> CapacityEstimate:
    """A [lower, upper] bracket for the capacity of the sampled set:
    Leja-greedy estimate from below, monic sup-norm certificate from
    above."""
    pts = leja_points(boundary_samples, n)
    lower = leja_capacity_lower(pts)
    upper = chebyshev_upper(boundary_samples, monic_poly)
    return CapacityEstimate(lower, upper, None, n)
