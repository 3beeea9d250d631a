"""Experiment harness for small-point equidistribution.

Sequences of Galois-stable sets with heights tending to zero should have
per-place diameters converging to the filled-Julia-set capacities while
staying height-taut; this module tabulates the exact gaps, verifies the
periodic-point discriminant identity, filters full subsystems by local
height, and compares archimedean root distributions against the two
analytically known equilibrium measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .capacity import discrete_energy, pairwise_distance_log
from .errors import ArithDynError
from .heights import (
    DynSystem,
    HeightValue,
    arch_heights_batch,
    canonical_height,
    log_capacity,
    padic_branches,
)
from .places import LogAbs, Place, log_abs
from .polyq import (
    GaloisSet,
    RatPoly,
    iterate,
    pairproduct_of_poly,
    periodic_set,
    preimage_set,
    resultant,
)
from .roots import complex_roots


# ---------------------------------------------------------------------------
# Set sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetSequence:
    """A family n -> S_n of Galois-stable sets.

    Kinds: "roots_of_unity" (param: the prime p; S_n = mu_{p^n}),
    "periodic" (param: DynSystem; S_n = points of period dividing n),
    "preimage" (param: (DynSystem, a); S_n = phi^-n(a)), and "custom"
    (param: tuple of GaloisSets indexed from n_lo).
    """

    kind: str
    param: object
    n_lo: int
    n_hi: int

    def __post_init__(self):
        if self.n_lo < 1 or self.n_hi < self.n_lo:
            raise ValueError("need 1 <= n_lo <= n_hi")
        if self.kind not in ("roots_of_unity", "periodic", "preimage", "custom"):
            raise ValueError(f"unknown sequence kind {self.kind!r}")

    def generate(self, n: int) -> GaloisSet:
        if self.kind == "roots_of_unity":
            p = int(self.param)  # type: ignore[arg-type]
            m = p**n
            f = RatPoly.from_coeffs([-1] + [0] * (m - 1) + [1])
            return GaloisSet.from_poly(f)
        if self.kind == "periodic":
            return periodic_set(self.param.phi, n).points  # type: ignore[union-attr]
        if self.kind == "preimage":
            sys, a = self.param  # type: ignore[misc]
            return preimage_set(sys.phi, n, Fraction(a))
        sets = self.param  # type: ignore[assignment]
        return sets[n - self.n_lo]


@dataclass(frozen=True)
class PlaceGap:
    place: Place
    dv: LogAbs
    log_cv: LogAbs
    gap: LogAbs  # dv - log_cv, from the same exact terms


@dataclass(frozen=True)
class EquidistRow:
    n: int
    cardinality: int
    hhat: HeightValue | None
    gaps: tuple[PlaceGap, ...]
    error: str | None = None


@dataclass(frozen=True)
class DistStats:
    ks: float
    energy_gap: float
    support_warning: bool


@dataclass(frozen=True)
class EquidistReport:
    rows: tuple[EquidistRow, ...]
    gap_monotone: dict[str, bool] = field(default_factory=dict)
    cardinality_increasing: bool = True
    stats: tuple[tuple[int, DistStats], ...] = ()


def equidistribution_report(
    seq: SetSequence,
    sys: DynSystem,
    places: list[Place],
    tol: float = 1e-9,
    reference: str | None = None,
    heights: bool = True,
) -> EquidistReport:
    """Tabulate, for each n in the range: the canonical height of S_n
    (tautness), the per-place diameters, the capacity targets, and the
    exact gaps.  Rows that fail (degree caps, undecided branches) are
    marked and the run continues."""
    if not places:
        raise ValueError("empty place list")
    rows: list[EquidistRow] = []
    stats: list[tuple[int, DistStats]] = []
    cards: list[int] = []
    for n in range(seq.n_lo, seq.n_hi + 1):
        try:
            S = seq.generate(n)
            cards.append(S.cardinality)
            hv = canonical_height(sys, S, tol=tol, cross_check=False) if heights else None
            gaps = []
            for v in sorted(places, key=lambda p: p.sort_key()):
                dv = pairwise_distance_log(S, v)
                cv = log_capacity(sys, v)
                gaps.append(PlaceGap(v, dv, cv, dv - cv))
            if reference is not None:
                stats.append((n, arch_distribution_stats(S, reference)))
            rows.append(EquidistRow(n, S.cardinality, hv, tuple(gaps)))
        except ArithDynError as exc:
            rows.append(EquidistRow(n, -1, None, (), error=str(exc)))
    monotone: dict[str, bool] = {}
    for v in places:
        series = [
            abs(g.gap.to_float())
            for row in rows
            if row.error is None
            for g in row.gaps
            if g.place == v
        ]
        monotone[str(v)] = all(
            b <= a + 1e-12 for a, b in zip(series, series[1:])
        )
    increasing = all(a < b for a, b in zip(cards, cards[1:]))
    return EquidistReport(tuple(rows), monotone, increasing, tuple(stats))


# ---------------------------------------------------------------------------
# The periodic-point discriminant identity
# ---------------------------------------------------------------------------


def periodic_point_discriminant_identity(
    sys: DynSystem, n: int, v: Place
) -> tuple[LogAbs, LogAbs]:
    """Both sides of the exact identity

        diam(Per_n) = c_v * prod over P in Per_n of |(phi^n)'(P) - 1|^(1/(N(N-1)))

    in log form: the left side from the normalized discriminant of the
    period polynomial, the right from the capacity plus the
    resultant-based multiplier product.  Exact at finite places."""
    g = iterate(sys.phi, n) - RatPoly.identity()
    S = GaloisSet.from_poly(g)
    N = g.degree
    if S.cardinality != N:
        raise ArithDynError("multiplicity at period n")
    norm = Fraction(1, N * (N - 1))
    lhs = pairwise_distance_log(S, v)
    # prod (phi^n)'(P) - 1 = prod g'(P) = Res(g, g') / lc(g)^(N-1)
    mult_product = resultant(g, g.derivative()) / g.leading ** (N - 1)
    if v.is_arch:
        logm = math.log(abs(mult_product.numerator)) - math.log(
            mult_product.denominator
        )
        rhs_tail = LogAbs.from_float(logm * float(norm))
    else:
        rhs_tail = log_abs(mult_product, v) * norm
    rhs = log_capacity(sys, v) + rhs_tail
    return lhs, rhs


# ---------------------------------------------------------------------------
# Full-subsystem filtering by local height
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeightBranch:
    """A branch of S at the place: archimedean branches carry the root,
    finite ones the orbit data."""

    multiplicity: int
    height: float
    point: complex | None = None


@dataclass(frozen=True)
class HeightPartition:
    kept: tuple[HeightBranch, ...]
    dropped: tuple[HeightBranch, ...]
    undecided_count: int

    @property
    def dropped_count(self) -> int:
        return sum(b.multiplicity for b in self.dropped)


def partition_by_local_height(
    S: GaloisSet, sys: DynSystem, v: Place, beta: float
) -> HeightPartition:
    """Split the branches of S at v by local height <= beta/2 (the full
    subsystem kept by the small-height filtration) versus above."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    kept: list[HeightBranch] = []
    dropped: list[HeightBranch] = []
    undecided = 0
    if v.is_arch:
        roots = complex_roots(S.poly)
        pts = np.array([r.value for r in roots])
        vals, _ = arch_heights_batch(sys, pts, tol=min(1e-12, beta / 10))
        for r, h in zip(roots, vals):
            branch = HeightBranch(1, float(h), r.value)
            (kept if h <= beta / 2 else dropped).append(branch)
    else:
        from .errors import UndecidedBranchError

        try:
            branches = padic_branches(sys, S.poly, v.prime)
        except UndecidedBranchError:
            return HeightPartition((), (), S.cardinality)
        logp = math.log(v.prime)
        for b in branches:
            h = float(b.height_coeff) * logp
            branch = HeightBranch(b.multiplicity, h)
            (kept if h <= beta / 2 else dropped).append(branch)
    return HeightPartition(tuple(kept), tuple(dropped), undecided)


# ---------------------------------------------------------------------------
# Escape sublevel sets
# ---------------------------------------------------------------------------


def escape_sublevel_membership(
    sys: DynSystem, z, m: int, beta: float
) -> bool:
    """Whether (1/d^m) log|phi^m(z)| <= beta, evaluated stably (switching
    to log coordinates once the orbit leaves float range)."""
    if m < 1 or beta <= 0:
        raise ValueError("need m >= 1 and beta > 0")
    d = sys.d
    w = complex(z)
    log_w: float | None = None
    lead = float(abs(sys.leading))
    for _ in range(m):
        if log_w is None:
            w = sys.phi(w)
            aw = abs(w)
            if aw > 1e100:
                log_w = math.log(aw)
        else:
            # beyond 1e100 the lower-order terms shift the log by < 1e-90
            log_w = d * log_w + math.log(lead)
    if log_w is not None:
        final = log_w
    elif abs(w) > 0:
        final = math.log(abs(w))
    else:
        final = -math.inf
    return final / d**m <= beta


def escape_sublevel_capacity(
    sys: DynSystem, v: Place, m: int, beta: float
) -> float:
    """Capacity of {(1/d^m) log|phi^m| <= beta}: e^beta * c_v^(1 - d^-m),
    from the lemniscate formula applied to phi^m."""
    if m < 1 or beta <= 0:
        raise ValueError("need m >= 1 and beta > 0")
    c = math.exp(log_capacity(sys, v).to_float())
    return math.exp(beta) * c ** (1.0 - sys.d ** (-m))


# ---------------------------------------------------------------------------
# Archimedean distribution statistics
# ---------------------------------------------------------------------------


def _ks_statistic(samples: np.ndarray, cdf) -> float:
    x = np.sort(samples)
    n = len(x)
    f = np.array([cdf(t) for t in x])
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


def arch_distribution_stats(S: GaloisSet, reference: str) -> DistStats:
    """Kolmogorov-Smirnov distance of the roots of S against a reference
    equilibrium distribution, plus the discrete-energy gap.

    references: "uniform_circle" (root angles against the uniform law) and
    "arcsine" (real parts against the arcsine law on [-2, 2]); both have
    capacity 1, so the energy gap is the discrete energy itself.
    """
    roots = complex_roots(S.poly)
    z = np.array([r.value for r in roots])
    if reference == "uniform_circle":
        warn = float(np.mean(np.abs(np.abs(z) - 1.0) > 0.5)) > 0.10
        angles = np.mod(np.angle(z), 2 * math.pi)
        ks = _ks_statistic(angles, lambda t: t / (2 * math.pi))
    elif reference == "arcsine":
        warn = float(np.mean((np.abs(z.real) > 2.5) | (np.abs(z.imag) > 0.5))) > 0.10
        x = np.clip(z.real, -2.0, 2.0)
        ks = _ks_statistic(x, lambda t: 0.5 + math.asin(t / 2.0) / math.pi)
    else:
        raise ValueError(f"unknown reference {reference!r}")
    energy_gap = discrete_energy(z)
    return DistStats(ks, energy_gap, warn)
