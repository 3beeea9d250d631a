"""Naive and canonical heights of Galois-stable sets, and canonical local
heights at every place.

Two independent algorithms back the canonical height: the sum of exact
p-adic local heights plus a certified archimedean escape-rate average, and
the pushforward-limit (1/d^n) h(phi^n(S)) with an explicit geometric tail
bound.  Disagreement beyond the combined bounds is a hard error.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CrossCheckError, UndecidedBranchError
from .places import (
    LogAbs,
    Place,
    factorize,
    log_abs,
    log_abs_exact_arch,
    padic_valuation,
)
from .polyq import GaloisSet, RatPoly, multiset_image_poly, squarefree_decomposition, squarefree_part
from .roots import ComplexApprox, complex_roots, root_valuations, sum_log_plus

_PADIC_KMAX = 32
_PADIC_BITS_GUARD = 400_000
_ARCH_KMAX = 1000


@dataclass(frozen=True)
class DynSystem:
    """A polynomial dynamical system phi of degree d >= 2 over Q."""

    phi: RatPoly

    def __post_init__(self):
        if self.phi.degree < 2:
            raise ValueError("need deg phi >= 2")

    @property
    def d(self) -> int:
        return self.phi.degree

    @property
    def leading(self) -> Fraction:
        return self.phi.leading

    def coefficient_primes(self) -> list[int]:
        primes: set[int] = set()
        for c in self.phi.coeffs:
            if c:
                primes |= set(factorize(c.numerator))
                primes |= set(factorize(c.denominator))
        return sorted(primes)


@dataclass(frozen=True)
class HeightValue:
    """A height in natural-log units: float total, an error bound, and the
    exact non-archimedean part kept symbolic."""

    value: float
    error_bound: float
    exact_part: LogAbs

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "error_bound": self.error_bound,
            "exact_part": self.exact_part.to_json(),
        }


# ---------------------------------------------------------------------------
# Reduction data at a finite place
# ---------------------------------------------------------------------------


def escape_valuation_threshold(sys: DynSystem, p: int) -> Fraction:
    """The valuation below which the leading term of phi strictly
    dominates, so |phi(z)| = |a_d z^d| and the local height is linear in
    v(z).  Minimum of (1/(d-i)) v(a_i/a_d) over i < d and
    (1/(d-1)) v(1/a_d), with v(0) = +infinity."""
    d = sys.d
    ad = sys.leading
    best = Fraction(-padic_valuation(ad, p), d - 1)
    for i in range(d):
        ai = sys.phi.coefficient(i)
        if ai == 0:
            continue
        term = Fraction(padic_valuation(ai / ad, p), d - i)
        best = min(best, term)
    return best


def has_good_reduction(sys: DynSystem, p: int) -> bool:
    """All coefficients p-integral and the leading coefficient a p-unit."""
    if padic_valuation(sys.leading, p) != 0:
        return False
    return all(
        padic_valuation(c, p) >= 0 for c in sys.phi.coeffs if c != 0
    )


def log_capacity(sys: DynSystem, v: Place) -> LogAbs:
    """log of the transfinite diameter of the filled Julia set at v:
    -(1/(d-1)) log|a_d|_v.  Exact at finite places."""
    return log_abs(sys.leading, v) * Fraction(-1, sys.d - 1)


def adelic_capacity_log_sum(sys: DynSystem) -> LogAbs:
    """Sum over all places of log-capacities, computed symbolically.

    The archimedean term is expanded over the prime factorization of the
    leading coefficient, so the result is an exact LogAbs (and is the
    exact zero for every phi, which the acceptance suite checks)."""
    ad = sys.leading
    total = log_abs_exact_arch(ad)
    for p in sorted(set(factorize(ad.numerator)) | set(factorize(ad.denominator))):
        total = total + log_abs(ad, Place.finite(p))
    return total * Fraction(-1, sys.d - 1)


def _trap_valuation_certificate(sys: DynSystem, p: int) -> Fraction | None:
    """A threshold t such that the disc {v(z) >= t} is phi-stable, which
    certifies boundedness (hence local height zero) for orbits inside it.
    None when no such disc exists (e.g. |a_1|_p > 1)."""
    d = sys.d
    t = Fraction(0)
    for i in range(2, d + 1):
        ai = sys.phi.coefficient(i)
        if ai == 0:
            continue
        t = max(t, Fraction(-padic_valuation(ai, p), i - 1))
    a1 = sys.phi.coefficient(1)
    if a1 != 0 and padic_valuation(a1, p) < 0:
        return None
    a0 = sys.phi.coefficient(0)
    if a0 != 0 and padic_valuation(a0, p) < t:
        return None
    return t


@dataclass(frozen=True)
class PadicBranch:
    """One orbit branch of a root multiset at a finite place."""

    multiplicity: int
    escaped: bool
    escape_step: int | None
    escape_valuation: Fraction | None
    height_coeff: Fraction  # local height of each point, as a multiple of log p
    certified: str  # "escape", "trap", "pattern", or "good-reduction"


def padic_branches(
    sys: DynSystem, f: RatPoly, p: int, k_max: int = _PADIC_KMAX
) -> list[PadicBranch]:
    """Exact local canonical heights of the root multiset of f at p,
    broken into orbit branches.

    Iterates the multiset image polynomials, reading off valuations from
    Newton polygons.  A branch whose valuation drops below the escape
    threshold contributes d^-k (log|z|_p - log c_p) exactly; branches that
    enter a certified stable disc, or whose valuation pattern repeats,
    contribute zero.  Anything else raises UndecidedBranchError.
    """
    d = sys.d
    if has_good_reduction(sys, p):
        out = []
        for v, mult in Counter(root_valuations(f, p)).items():
            coeff = max(Fraction(0), -v) if v is not None else Fraction(0)
            out.append(
                PadicBranch(mult, coeff > 0, None, None, coeff, "good-reduction")
            )
        return out

    alpha = escape_valuation_threshold(sys, p)
    vad = Fraction(padic_valuation(sys.leading, p))
    trap = _trap_valuation_certificate(sys, p)
    branches: list[PadicBranch] = []
    # (step escaped, valuation at escape, multiplicity); their future
    # valuations follow v -> d*v + v(a_d) exactly.
    escaped: list[tuple[int, Fraction, int]] = []
    seen: dict[tuple, int] = {}
    poly = f

    def predicted(step: int, k: int, v: Fraction) -> Fraction:
        for _ in range(k - step):
            v = d * v + vad
        return v

    for k in range(k_max + 1):
        vals = Counter(root_valuations(poly, p))
        for step, v0, mult in escaped:
            pv = predicted(step, k, v0)
            if vals[pv] < mult:
                raise UndecidedBranchError(
                    "undecided branch: escaped-branch valuation bookkeeping "
                    f"failed at step {k} of the orbit at p={p}",
                    state=dict(vals),
                )
            vals[pv] -= mult
            if not vals[pv]:
                del vals[pv]
        new_escapes = [
            (v, m) for v, m in vals.items() if v is not None and v < alpha
        ]
        for v, mult in new_escapes:
            coeff = Fraction(d) ** (-k) * (-v - vad / (d - 1))
            branches.append(PadicBranch(mult, True, k, v, coeff, "escape"))
            escaped.append((k, v, mult))
            del vals[v]
        if not vals:
            return branches
        if trap is not None and all(
            v is None or v >= trap for v in vals
        ):
            for v, mult in sorted(
                vals.items(), key=lambda t: (t[0] is None, t[0] or 0)
            ):
                branches.append(
                    PadicBranch(mult, False, None, None, Fraction(0), "trap")
                )
            return branches
        key = tuple(
            sorted(((v, m) for v, m in vals.items()), key=lambda t: (t[0] is None, t[0] or 0))
        )
        if key in seen:
            for v, mult in key:
                branches.append(
                    PadicBranch(mult, False, None, None, Fraction(0), "pattern")
                )
            return branches
        seen[key] = k
        poly = multiset_image_poly(poly, sys.phi)
        if poly.max_coeff_bits() > _PADIC_BITS_GUARD:
            raise UndecidedBranchError(
                f"undecided branch: coefficient blowup at step {k + 1} "
                f"of the orbit at p={p}",
                state={"bits": poly.max_coeff_bits()},
            )
    raise UndecidedBranchError(
        f"undecided branch: no escape or repeating valuation pattern within "
        f"{k_max} steps at p={p}",
        state=dict(vals),
    )


def local_height_padic(sys: DynSystem, S: GaloisSet, p: int) -> LogAbs:
    """Average canonical local height of S at p, exact.

    Good reduction reduces to the standard local height; otherwise the
    multiset orbit of S is iterated until every branch is decided.
    """
    branches = padic_branches(sys, S.poly, p)
    n = S.cardinality
    total = sum((b.height_coeff * b.multiplicity for b in branches), Fraction(0))
    return LogAbs.exact(total / n, p)


# ---------------------------------------------------------------------------
# Archimedean local heights (escape rate)
# ---------------------------------------------------------------------------


def _arch_escape_data(sys: DynSystem) -> tuple[float, float, float]:
    """(R_esc, s_rel, log_c): the doubling escape radius, the relative
    lower-order coefficient mass, and log of the archimedean capacity."""
    ad = abs(sys.leading)
    total = sum(abs(c) for c in sys.phi.coeffs[:-1])
    r = (2 + total) / ad
    d = sys.d
    r_esc = max(1.0, float(r) ** (1.0 / (d - 1)))
    s_rel = float(total / ad)
    log_c = -math.log(float(ad)) / (d - 1)
    return r_esc, s_rel, log_c


def arch_heights_batch(
    sys: DynSystem, points: np.ndarray, tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Escape-rate local heights of an array of complex points; returns
    (values, error_bounds)."""
    d = sys.d
    r_esc, s_rel, log_c = _arch_escape_data(sys)
    coeffs = np.array([float(c) for c in sys.phi.coeffs], dtype=complex)
    big = 10.0 ** (250.0 / d)

    w = np.array(points, dtype=complex)
    values = np.zeros(len(w))
    errors = np.full(len(w), float(tol))
    active = np.ones(len(w), dtype=bool)
    scale = 1.0
    for k in range(_ARCH_KMAX + 1):
        if not active.any():
            break
        aw = np.abs(w[active])
        esc = aw > r_esc
        if esc.any():
            x = np.minimum(s_rel / aw[esc], 0.99)
            tail = -np.log1p(-x) * scale / (d - 1)
            done = (tail < tol) | (aw[esc] > big)
            if done.any():
                idx_active = np.flatnonzero(active)
                idx = idx_active[np.flatnonzero(esc)[done]]
                values[idx] = scale * (np.log(aw[esc][done]) - log_c)
                errors[idx] = tail[done] + 1e-14 * (1.0 + np.abs(values[idx]))
                active[idx] = False
        if k == _ARCH_KMAX:
            break
        # advance the still-active orbits
        wa = w[active]
        p = np.zeros_like(wa)
        for c in coeffs[::-1]:
            p = p * wa + c
        w[active] = p
        scale /= d
    return values, errors


def local_height_arch(sys: DynSystem, z, tol: float = 1e-12) -> HeightValue:
    """Canonical local height at the archimedean place by escape-rate
    iteration.  Bounded orbits (through the iteration cap) report zero
    with error_bound tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    zval = complex(z) if not isinstance(z, ComplexApprox) else z.value
    vals, errs = arch_heights_batch(sys, np.array([zval]), tol)
    return HeightValue(float(vals[0]), float(errs[0]), LogAbs.zero())


# ---------------------------------------------------------------------------
# Naive (Weil) heights of Galois sets
# ---------------------------------------------------------------------------


def naive_height(S: GaloisSet, tol: float = 1e-12) -> HeightValue:
    """Absolute logarithmic height of S: the average over the set of the
    sum of log^+ over all places.  Non-archimedean contributions are exact
    (they live at the primes of the leading coefficient)."""
    f = S.poly
    n = S.cardinality
    exact = LogAbs.zero()
    for p in sorted(factorize(f.leading.numerator)):
        exact = exact + sum_log_plus(f, Place.finite(p))
    exact = exact * Fraction(1, n)
    arch = sum_log_plus(f, Place.archimedean(), tol=tol)
    err = _root_residual_error(f, tol) / n
    return HeightValue(
        exact.to_float() + arch.to_float() / n, err, exact
    )


def _root_residual_error(f: RatPoly, tol: float) -> float:
    # log^+ is 1-Lipschitz in log|z| away from |z|=1; crude but safe slack.
    return 4.0 * tol * f.degree


def mahler_height(S: GaloisSet, tol: float = 1e-12) -> HeightValue:
    """Height via the Mahler-measure identity
    h(S) = (1/N)(log|lead| + sum log^+ |alpha_i|_infty); the independent
    oracle certifying naive_height."""
    f = S.poly
    n = S.cardinality
    exact = log_abs_exact_arch(f.leading) * Fraction(1, n)
    arch = sum(
        max(0.0, math.log(abs(r.value))) if abs(r.value) > 0 else 0.0
        for r in complex_roots(f, tol=tol)
    )
    err = _root_residual_error(f, tol) / n
    return HeightValue(exact.to_float() + arch / n, err, exact)


def _mahler_of_multiset(F: RatPoly, tol: float = 1e-10) -> tuple[float, float]:
    """(height, error) of the root multiset of an integer primitive F:
    (1/deg)(log|lc| + sum with multiplicity of log^+|roots|)."""
    n = F.degree
    lead = abs(F.leading)
    total = math.log(lead.numerator) - math.log(lead.denominator)
    err = 0.0
    sqf = squarefree_part(F)
    if sqf.degree == F.degree:
        parts = [(F, 1)]
    else:
        parts = squarefree_decomposition(F)
    for g, mult in parts:
        if g.degree < 1:
            continue
        for r in complex_roots(g.primitive_part(), tol=tol):
            a = abs(r.value)
            if a > 0:
                total += mult * max(0.0, math.log(a))
            err += 2.0 * mult * tol
    return total / n, err / n


# ---------------------------------------------------------------------------
# The explicit height-difference constant
# ---------------------------------------------------------------------------


def height_step_bound(sys: DynSystem) -> float:
    """An explicit C with |h(phi(T)) - d h(T)| <= C for every finite set T.

    Summed per place from pointwise bounds on |log^+|phi(z)| - d log^+|z||:

    * archimedean, upper: |phi(z)| <= (sum|a_i|) max(1,|z|)^d.
    * archimedean, lower: inside |z| <= R2 := max(1, 2 sum_{i<d}|a_i|/|a_d|)
      trivially d log^+|z| <= d log R2; outside, |phi(z)| >= |a_d||z|^d / 2.
    * finite p, upper: |phi(z)|_p <= max|a_i|_p max(1,|z|)^d.
    * finite p, lower: for v(z) below the escape threshold the leading
      term dominates exactly; above it log^+|z| <= max(0, -alpha_v) log p.
    """
    d = sys.d
    ad = abs(sys.leading)
    total = sum(abs(c) for c in sys.phi.coeffs[:-1])
    gamma_up = max(0.0, math.log(float(total + ad))) if total + ad > 1 else 0.0
    r2 = max(1.0, float(2 * total / ad)) if total else 1.0
    gamma_dn = max(
        d * math.log(r2),
        math.log(2.0) + max(0.0, -math.log(float(ad))),
    )
    c = max(gamma_up, gamma_dn)
    for p in sys.coefficient_primes():
        vmin = min(
            padic_valuation(a, p) for a in sys.phi.coeffs if a != 0
        )
        g_up = max(0, -vmin) * math.log(p)
        alpha = escape_valuation_threshold(sys, p)
        vad = padic_valuation(sys.leading, p)
        g_dn = max(d * max(0.0, -float(alpha)), max(0, vad)) * math.log(p)
        c += max(g_up, g_dn)
    return c


# ---------------------------------------------------------------------------
# Canonical heights
# ---------------------------------------------------------------------------


def _relevant_height_primes(sys: DynSystem, f: RatPoly) -> list[int]:
    primes = set(sys.coefficient_primes())
    primes |= set(factorize(f.leading.numerator))
    for c in f.coeffs:
        if c:
            primes |= set(factorize(c.numerator))
    return sorted(primes)


def pushforward_limit_height(
    sys: DynSystem, S: GaloisSet, steps: int
) -> tuple[float, float]:
    """The oracle: (1/d^n) h(phi^n(S)) with its geometric tail bound.

    The iteration is multiplicity-preserving (multiset images), which
    keeps the limit identity exact even when phi collapses points of S.
    Returns (value, error_bound)."""
    d = sys.d
    F = S.poly
    for _ in range(steps):
        F = multiset_image_poly(F, sys.phi)
    h_n, root_err = _mahler_of_multiset(F)
    scale = float(Fraction(d) ** (-steps))
    tail = height_step_bound(sys) * scale / (d - 1)
    return h_n * scale, tail + root_err * scale


def canonical_height(
    sys: DynSystem,
    S: GaloisSet,
    tol: float = 1e-9,
    cross_check: bool | None = None,
    oracle_steps: int | None = None,
) -> HeightValue:
    """Canonical height of S for phi.

    Primary algorithm: exact p-adic local heights at every relevant prime
    plus the certified archimedean escape-rate average.  When cross_check
    is enabled (the default at desk-scale degrees) the pushforward-limit
    oracle is evaluated too, and disagreement beyond the combined error
    bounds raises CrossCheckError.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = S.poly
    n = S.cardinality
    exact = LogAbs.zero()
    for p in _relevant_height_primes(sys, f):
        exact = exact + local_height_padic(sys, S, p)
    roots = complex_roots(f, tol=min(1e-12, tol))
    pts = np.array([r.value for r in roots])
    vals, errs = arch_heights_batch(sys, pts, tol / max(1, 2 * n))
    arch_val = float(np.sum(vals)) / n
    arch_err = float(np.sum(errs)) / n + _root_residual_error(f, 1e-12) / n
    value = exact.to_float() + arch_val
    err = arch_err + 1e-14 * (1 + abs(value))
    result = HeightValue(value, err, exact)

    if cross_check is None:
        cross_check = n <= 8 and sys.d <= 4
    if cross_check:
        if oracle_steps is None:
            c_step = height_step_bound(sys)
            steps = 1
            while steps < 8 and c_step / ((sys.d - 1) * sys.d**steps) > 0.02:
                steps += 1
        else:
            steps = oracle_steps
        oracle_val, oracle_err = pushforward_limit_height(sys, S, steps)
        if abs(value - oracle_val) > err + oracle_err + 1e-9:
            raise CrossCheckError(
                f"canonical height {value!r} (err {err:.2e}) vs pushforward "
                f"oracle {oracle_val!r} (err {oracle_err:.2e}) disagree"
            )
    return result


def is_preperiodic_rational(sys: DynSystem, x: Fraction) -> bool:
    """Exact forward-orbit preperiodicity test for a rational point.

    The orbit either repeats (preperiodic) or its naive height exceeds the
    explicit escape bound, which certifies positive canonical height;
    termination is guaranteed since rationals of bounded height with the
    denominators that can occur form a finite set."""
    x = Fraction(x)
    d = sys.d
    bound = height_step_bound(sys) / (d - 1) + 1.0
    seen = {x}
    current = x
    for _ in range(100_000):
        current = sys.phi(current)
        h = math.log(max(abs(current.numerator), current.denominator)) if current else 0.0
        if h > bound:
            return False
        if current in seen:
            return True
        seen.add(current)
    raise RuntimeError("orbit iteration budget exceeded")  # pragma: no cover
