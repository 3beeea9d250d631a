"""Root data at the two kinds of places.

Archimedean: certified complex approximations via Aberth-Ehrlich
simultaneous iteration (double precision first, multiprecision refinement
when the certification demands it).  Non-archimedean: exact root
valuations read off the Newton polygon, which is all any formula in this
package needs p-adically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import NonConvergenceError
from .places import LogAbs, Place, padic_valuation
from .polyq import RatPoly

_GOLDEN_ANGLE = 2.0 * math.pi * (1.0 - 2.0 / (1.0 + math.sqrt(5.0)))
_RESIDUAL_TOL = 1e-12
_MAX_SWEEPS = 200


@dataclass(frozen=True)
class ComplexApprox:
    """A complex root approximation with a certified error radius of the
    |f(z)| / |f'(z)| kind."""

    re: float
    im: float
    residual_bound: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def _initial_circle(f: RatPoly, n: int) -> np.ndarray:
    radius_exact = 1 + max(abs(c / f.leading) for c in f.coeffs[:-1])
    radius = float(min(radius_exact, Fraction(10**100)))
    angles = _GOLDEN_ANGLE * np.arange(n) + 0.3
    return radius * np.exp(1j * angles)


def _fujiwara_log_bound(f: RatPoly) -> float:
    """log of the Fujiwara root bound 2 * max_i |a_i/a_d|^(1/(d-i))."""
    d = f.degree
    best = -math.inf
    for i, c in enumerate(f.coeffs[:-1]):
        if not c:
            continue
        ratio = abs(c / f.leading)
        logr = math.log(ratio.numerator) - math.log(ratio.denominator)
        best = max(best, logr / (d - i))
    if best == -math.inf:
        return 0.0
    return math.log(2.0) + best


def _aberth_double(coeffs: np.ndarray, z: np.ndarray, sweeps: int) -> np.ndarray:
    """Aberth-Ehrlich sweeps in double precision; coeffs ascending."""
    n = len(z)
    dcoeffs = np.arange(1, len(coeffs)) * coeffs[1:]
    for _ in range(sweeps):
        p = np.zeros_like(z)
        for c in coeffs[::-1]:
            p = p * z + c
        dp = np.zeros_like(z)
        for c in dcoeffs[::-1]:
            dp = dp * z + c
        small = np.abs(dp) < 1e-300
        dp = np.where(small, 1e-300, dp)
        w = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        step = w / denom
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(z))):
            break
    return z


def _horner_error_bound(abs_coeffs: np.ndarray, absz: np.ndarray) -> np.ndarray:
    """Running error bound for double-precision Horner evaluation."""
    u = 2.0**-52
    acc = np.zeros_like(absz)
    for i, a in enumerate(abs_coeffs[::-1]):
        k = len(abs_coeffs) - 1 - i
        acc = acc * absz + a * (2 * k + 1)
    return acc * u


def _certify_double(f: RatPoly, z: np.ndarray) -> np.ndarray | None:
    """Residual bounds |f/f'| at the points, or None if double-precision
    evaluation cannot certify them (cancellation dominates)."""
    try:
        coeffs = np.array([float(c) for c in f.coeffs], dtype=complex)
    except OverflowError:
        return None
    if not np.all(np.isfinite(coeffs)):
        return None
    dcoeffs = np.arange(1, len(coeffs)) * coeffs[1:]
    p = np.zeros_like(z)
    for c in coeffs[::-1]:
        p = p * z + c
    dp = np.zeros_like(z)
    for c in dcoeffs[::-1]:
        dp = dp * z + c
    absz = np.abs(z)
    err_p = _horner_error_bound(np.abs(coeffs), absz)
    err_dp = _horner_error_bound(np.abs(dcoeffs), absz)
    denom = np.abs(dp) - err_dp
    if np.any(denom <= 0):
        return None
    bound = (np.abs(p) + err_p) / denom
    return bound


def _mp_context(f: RatPoly):
    dps = max(40, int(0.302 * f.max_coeff_bits()) + 25)
    ctx = mpmath.mp.clone()
    ctx.dps = dps
    return ctx


def _mp_refine(f: RatPoly, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Aberth sweeps in multiprecision from the given seeds; returns
    refined points and certified residual bounds."""
    ctx = _mp_context(f)
    coeffs = [ctx.mpf(c.numerator) / ctx.mpf(c.denominator) for c in f.coeffs]
    dcf = [k * c for k, c in enumerate(coeffs)][1:]
    pts = [ctx.mpc(complex(v)) for v in z]
    n = len(pts)

    def horner(cs, x):
        acc = ctx.mpf(0)
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    for _ in range(60):
        corr = []
        max_newton = 0.0
        for i in range(n):
            x = pts[i]
            p = horner(coeffs, x)
            dp = horner(dcf, x)
            if dp == 0:
                corr.append(ctx.mpf(0))
                max_newton = math.inf
                continue
            w = p / dp
            max_newton = max(max_newton, float(abs(w) / (1 + abs(x))))
            s = ctx.mpf(0)
            for j in range(n):
                if j != i:
                    d = x - pts[j]
                    if d != 0:
                        s += 1 / d
            denom = 1 - w * s
            corr.append(w / denom if denom != 0 else w)
        if max_newton < 1e-14:
            break  # Newton steps are the residual bounds; already certified
        pts = [x - c for x, c in zip(pts, corr)]
    res = []
    for x in pts:
        p = horner(coeffs, x)
        dp = horner(dcf, x)
        res.append(float(abs(p) / abs(dp)) if dp != 0 else math.inf)
    out = np.array([complex(x.real, x.imag) for x in pts])
    return out, np.array(res)


def _colleague_seeds(f: RatPoly) -> np.ndarray | None:
    """Root seeds from the colleague matrix of the exact Chebyshev-basis
    expansion of f, scaled to the Fujiwara root bound.  Stable for
    polynomials whose monomial coefficients are too large for double
    precision but whose roots sit near a real interval."""
    n = f.degree
    log_rho = _fujiwara_log_bound(f)
    if abs(log_rho) > 44:  # interval scale outside double range usefulness
        return None
    # small-denominator rho keeps the exact basis change cheap
    rho = Fraction(math.ceil(max(math.exp(log_rho), 1.0) * 16), 16)
    # Exact basis change: represent f in T_k(z / rho) using the recurrence
    # z * T_k = rho/2 * (T_{k+1} + T_{|k-1|}) for k >= 1, z * T_0 = rho * T_1.
    half = rho / 2
    cheb: list[dict[int, Fraction]] = [{0: Fraction(1)}]  # T-coeffs of z^k
    for _ in range(n):
        prev = cheb[-1]
        nxt: dict[int, Fraction] = {}
        for k, a in prev.items():
            for k2 in (k + 1, abs(k - 1)):
                nxt[k2] = nxt.get(k2, Fraction(0)) + a * half
        cheb.append(nxt)
    tcoeffs: dict[int, Fraction] = {}
    for k, c in enumerate(f.coeffs):
        if not c:
            continue
        for j, a in cheb[k].items():
            tcoeffs[j] = tcoeffs.get(j, Fraction(0)) + c * a
    deg = max(tcoeffs)
    if deg != n or not tcoeffs.get(n):
        return None
    scale = max(abs(v) for v in tcoeffs.values())
    a = np.zeros(n + 1)
    for j, v in tcoeffs.items():
        val = v / scale
        a[j] = float(val)
    if not np.all(np.isfinite(a)) or a[n] == 0:
        return None
    # Colleague matrix for sum a_k T_k.
    mat = np.zeros((n, n))
    for i in range(n - 1):
        mat[i + 1, i] = 0.5
        mat[i, i + 1] = 0.5
    mat[0, 1] = 1.0
    mat[n - 1, :] -= a[:n] / (2 * a[n])
    try:
        eig = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError:
        return None
    return eig * float(rho)


def complex_roots(f: RatPoly, tol: float = _RESIDUAL_TOL) -> list[ComplexApprox]:
    """All complex roots of f with certified residual bounds.

    Aberth-Ehrlich iteration from deterministic golden-angle points on the
    root-bound circle; residuals are certified in double precision where a
    running error analysis allows it and in multiprecision otherwise.
    Callers that need set semantics must pass squarefree input; multiple
    roots are returned with multiplicity at whatever accuracy the cluster
    permits.
    """
    if f.is_zero or f.degree < 1:
        raise ValueError("need a nonconstant polynomial")
    n = f.degree
    if n == 1:
        x = -f.coeffs[0] / f.coeffs[1]
        xf = float(x)
        return [ComplexApprox(xf, 0.0, abs(xf) * 2.0**-50)]

    float_ok = f.max_coeff_bits() < 960
    z = None
    if float_ok:
        coeffs = np.array([float(c) for c in f.coeffs], dtype=complex)
        scale = np.max(np.abs(coeffs))
        coeffs = coeffs / scale
        z = _aberth_double(coeffs, _initial_circle(f, n), _MAX_SWEEPS)
        bounds = _certify_double(f, z)
        if bounds is not None and np.all(bounds < tol * (1.0 + np.abs(z))):
            return [
                ComplexApprox(float(x.real), float(x.imag), float(b))
                for x, b in zip(z, bounds)
            ]
    # Escalate: seed from the Chebyshev colleague matrix when the monomial
    # basis is hopeless, then refine with multiprecision Aberth.
    seeds = None
    if z is not None:
        seeds = z
    cseeds = _colleague_seeds(f)
    if cseeds is not None and len(cseeds) == n:
        if seeds is None:
            seeds = cseeds
        else:
            bounds = _certify_double(f, seeds)
            if bounds is None or not np.all(np.isfinite(bounds)):
                seeds = cseeds
    if seeds is None:
        seeds = _initial_circle(f, n)
    refined, res = _mp_refine(f, seeds)
    # One retry from colleague seeds if the first refinement stalled.
    if not np.all(res < tol * (1.0 + np.abs(refined))) and cseeds is not None:
        refined2, res2 = _mp_refine(f, cseeds)
        if np.max(res2) < np.max(res):
            refined, res = refined2, res2
    if not np.all(res < tol * (1.0 + np.abs(refined))):
        raise NonConvergenceError(
            "root iteration did not certify all residuals",
            best=[
                ComplexApprox(float(x.real), float(x.imag), float(b))
                for x, b in zip(refined, res)
            ],
        )
    return [
        ComplexApprox(float(x.real), float(x.imag), float(b))
        for x, b in zip(refined, res)
    ]


# ---------------------------------------------------------------------------
# Newton polygons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of (i, v_p(a_i)).

    A segment of slope s and length l certifies exactly l roots of
    valuation -s; roots at zero are split off first and counted in
    `zero_roots` (their valuation is +infinity).
    """

    segments: tuple[tuple[Fraction, int], ...]
    zero_roots: int = 0

    def root_valuations(self) -> list[Fraction | None]:
        """Valuation multiset; None encodes +infinity (roots at 0)."""
        out: list[Fraction | None] = [None] * self.zero_roots
        for slope, length in self.segments:
            out.extend([-slope] * length)
        return out


def newton_polygon(f: RatPoly, p: int) -> NewtonPolygon:
    """Newton polygon of f at p (zero roots split off first)."""
    if f.is_zero:
        raise ValueError("zero polynomial")
    k = 0
    while f.coefficient(k) == 0:
        k += 1
    pts = [
        (i - k, Fraction(padic_valuation(f.coefficient(i), p)))
        for i in range(k, f.degree + 1)
        if f.coefficient(i) != 0
    ]
    # Monotone-chain lower hull on exact rational ordinates.
    hull: list[tuple[int, Fraction]] = []
    for x, y in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop if the middle point is above the segment (x1,y1)-(x,y)
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((x, y))
    segments = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segments.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    return NewtonPolygon(tuple(segments), zero_roots=k)


def root_valuations(f: RatPoly, p: int) -> list[Fraction | None]:
    """Multiset of p-adic valuations of the roots of f (None = +infinity)."""
    return newton_polygon(f, p).root_valuations()


def sum_log_plus(f: RatPoly, v: Place, tol: float = _RESIDUAL_TOL) -> LogAbs:
    """Sum of log^+ |alpha|_v over the root multiset of f.

    Exact at finite places (a rational multiple of log p, from the
    positive-slope part of the Newton polygon); a float at the archimedean
    place, from certified root approximations.
    """
    if f.degree < 1:
        raise ValueError("need a nonconstant polynomial")
    if v.is_arch:
        total = 0.0
        for r in complex_roots(f, tol=tol):
            total += max(0.0, math.log(abs(r.value))) if abs(r.value) > 0 else 0.0
        return LogAbs.from_float(total)
    coeff = Fraction(0)
    for slope, length in newton_polygon(f, v.prime).segments:
        if slope > 0:
            coeff += slope * length
    return LogAbs.exact(coeff, v.prime)
