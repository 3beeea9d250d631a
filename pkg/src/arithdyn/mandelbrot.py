"""The adelic Mandelbrot set.

At each prime the p-adic Mandelbrot set is the closed unit disc, so the
local distance function is log^+|.|_p; at the archimedean place it is the
escape rate of the critical orbit of z^2 + c.  The lemniscates
{|psi_n| <= 2} for the critical-orbit polynomials psi_n shrink to the
Mandelbrot set with capacities 2^(1/2^(n-1)) -> 1, giving an adelic
capacity product of 1 and a height function vanishing exactly at the
parameters with finite critical orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import config
from .errors import DegreeCapError
from .heights import HeightValue, _root_residual_error
from .places import LogAbs, Place, factorize
from .polyq import GaloisSet, RatPoly
from .roots import complex_roots, sum_log_plus

_ESCAPE_KMAX = 5000


def critical_orbit_poly(n: int, cap: int | None = None) -> RatPoly:
    """The monic degree 2^(n-1) polynomial in c whose value is the n-th
    critical orbit point of z^2 + c: p_1 = c and p_{k+1} = p_k^2 + c."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cap = config.degree_cap() if cap is None else cap
    if 2 ** (n - 1) > cap:
        raise DegreeCapError("critical orbit polynomial degree cap")
    psi = RatPoly.identity()
    for _ in range(n - 1):
        psi = psi * psi + RatPoly.identity()
    return psi


@dataclass(frozen=True)
class GreenLemniscate:
    """The region {|P(z)| <= R} with its Green's function
    (1/deg P) log^+ |P(z)/R|."""

    poly: RatPoly
    radius: float

    def __post_init__(self):
        if self.poly.degree < 1:
            raise ValueError("need deg P >= 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def _poly_log_abs(P: RatPoly, z: complex) -> float:
    """log|P(z)| evaluated stably for huge coefficients or huge |z|:
    coefficients are scaled by their largest magnitude, and for |z| > 2
    the leading power is factored out so Horner runs in 1/z."""
    scale = max(abs(c) for c in P.coeffs)
    logscale = math.log(scale.numerator) - math.log(scale.denominator)
    coeffs = [float(c / scale) for c in P.coeffs]
    az = abs(z)
    if az <= 2.0:
        acc = 0j
        for c in reversed(coeffs):
            acc = acc * z + c
        a = abs(acc)
        return logscale + (math.log(a) if a > 0 else -math.inf)
    w = 1.0 / z
    acc = 0j
    for c in coeffs:
        acc = acc * w + c
    a = abs(acc)
    return logscale + P.degree * math.log(az) + (math.log(a) if a > 0 else -math.inf)


def green_value(L: GreenLemniscate, z) -> float:
    """The Green's function of the lemniscate at z: nonnegative, zero
    inside."""
    val = _poly_log_abs(L.poly, complex(z)) - math.log(L.radius)
    return max(0.0, val) / L.poly.degree


def mandelbrot_escape_rate(c, tol: float = 1e-12) -> float:
    """The archimedean Mandelbrot distance function at c: the limit of
    2^(1-n) log^+ |psi_n(c)/2|, evaluated by critical-orbit escape.

    Orbits bounded by the escape radius through 5000 steps report 0."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = complex(c)
    r_esc = max(2.0, abs(c)) + 1.0
    log_r = math.log(r_esc)
    w = c  # the orbit value psi_k(c), k = 1 to start
    log_w: float | None = None
    for k in range(1, _ESCAPE_KMAX + 1):
        if log_w is not None:
            la = log_w
        elif abs(w) > 0:
            la = math.log(abs(w))
        else:
            la = None
        if la is not None and la > log_r:
            x = min(abs(c) * math.exp(-2.0 * la), 0.5)
            tail = -math.log1p(-x) * 2.0 ** (1 - k)
            if tail < tol:
                return 2.0 ** (1 - k) * la
        if log_w is not None:
            # |c| / |w|^2 < 1e-190 here; the dropped term is far below tol
            log_w = 2.0 * log_w
        else:
            w = w * w + c
            if abs(w) > 1e100:
                log_w = math.log(abs(w))
    return 0.0


def _critical_orbit_finite_rational(c: Fraction) -> bool:
    """Exact finiteness of the critical orbit of z^2 + c for rational c."""
    seen = {Fraction(0)}
    w = Fraction(0)
    bound = max(2, abs(c)) + 1
    for _ in range(10_000):
        w = w * w + c
        if abs(w) > bound:
            return False
        if w in seen:
            return True
        seen.add(w)
    raise RuntimeError("orbit budget exceeded")  # pragma: no cover


def critical_orbit_is_finite(
    S: GaloisSet, step_cap: int = 64, bits_cap: int = 20_000
) -> bool | None:
    """Exact decision (when affordable) of whether every conjugate in S
    has finite critical orbit under z^2 + c.

    The orbit value after k steps is a polynomial in c; iterating it
    modulo the defining polynomial of S detects exact cycles.  Returns
    None when neither a cycle nor an escape certificate appears within
    the caps."""
    f = S.poly
    if f.degree == 1:
        return _critical_orbit_finite_rational(-f.coeffs[0] / f.coeffs[1])
    lead = f.leading
    fm = f.scale(1 / lead)
    cpoly = RatPoly.identity()
    w = RatPoly.zero()
    seen = {w.coeffs}
    for _ in range(step_cap):
        w = w * w + cpoly
        _, w = w.divmod(fm)
        if w.coeffs in seen:
            return True
        seen.add(w.coeffs)
        if w.max_coeff_bits() > bits_cap:
            return None
    return None


def mandelbrot_height(S: GaloisSet, tol: float = 1e-12) -> HeightValue:
    """The adelic Mandelbrot height of S: exact log^+ sums at the finite
    places plus the average archimedean escape rate; zero exactly when
    every conjugate has finite critical orbit (certified exactly whenever
    the orbit cycle is detectable)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = S.poly
    n = S.cardinality
    exact = LogAbs.zero()
    for p in sorted(factorize(f.leading.numerator)):
        exact = exact + sum_log_plus(f, Place.finite(p))
    exact = exact * Fraction(1, n)
    finite = critical_orbit_is_finite(S)
    if finite:
        return HeightValue(exact.to_float(), 0.0, exact)
    arch = 0.0
    err = _root_residual_error(f, 1e-12) / n
    for r in complex_roots(f):
        arch += mandelbrot_escape_rate(r.value, tol=tol)
    return HeightValue(exact.to_float() + arch / n, err + tol, exact)


def mandelbrot_capacity_partial(n: int) -> float:
    """Capacity of the n-th Mandelbrot lemniscate {|psi_n| <= 2}:
    2^(1/2^(n-1)), strictly decreasing to 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 ** (2.0 ** (1 - n))


def mandelbrot_capacity_partial_log(n: int) -> LogAbs:
    """The same capacity in exact log form: 2^(1-n) * log 2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return LogAbs.exact(Fraction(1, 2 ** (n - 1)), 2)


def mandelbrot_lemniscate(n: int) -> GreenLemniscate:
    return GreenLemniscate(critical_orbit_poly(n), 2.0)


def green_grid_comparison(
    n_levels: int, grid_points: int = 1000, box: float = 2.5
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Green's functions of the nested Mandelbrot lemniscates on a
    deterministic complex grid; used to observe monotonicity (deeper
    lemniscates are smaller, so their Green's functions dominate)."""
    side = int(math.isqrt(grid_points))
    xs = np.linspace(-box, box, side)
    ys = np.linspace(-box, box, side)
    grid = np.array([complex(x, y) for x in xs for y in ys])
    levels = []
    for n in range(1, n_levels + 1):
        L = mandelbrot_lemniscate(n)
        levels.append(np.array([green_value(L, z) for z in grid]))
    return grid, levels
