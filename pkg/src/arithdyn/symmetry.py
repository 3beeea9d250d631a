"""Exact symmetry computations for Julia sets of polynomials over Q.

The symmetry group of a Julia set consists of rotations about the
centroid, and an affine map sigma belongs to it exactly when
phi o sigma = sigma^d o phi.  That functional equation is decided here
coefficient by coefficient over the Gaussian rationals; rotation orders
beyond the Gaussian ones come from the coefficient support of the
centered form z^r psi(z^n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .heights import DynSystem
from .polyq import RatPoly

_F0 = Fraction(0)
_F1 = Fraction(1)


@dataclass(frozen=True)
class GaussRational:
    """Exact element of Q(i)."""

    re: Fraction
    im: Fraction = _F0

    @staticmethod
    def of(x) -> "GaussRational":
        if isinstance(x, GaussRational):
            return x
        return GaussRational(Fraction(x))

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other) -> "GaussRational":
        o = GaussRational.of(other)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussRational":
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other) -> "GaussRational":
        return self + (-GaussRational.of(other))

    def __mul__(self, other) -> "GaussRational":
        o = GaussRational.of(other)
        return GaussRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "GaussRational":
        acc = GaussRational(_F1)
        base = self
        for _ in range(k):
            acc = acc * base
        return acc

    def __eq__(self, other):
        o = GaussRational.of(other)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"


I = GaussRational(_F0, _F1)


@dataclass(frozen=True)
class AffineMap:
    """z -> a z + b over the Gaussian rationals, a != 0."""

    a: GaussRational
    b: GaussRational = GaussRational(_F0)

    def __post_init__(self):
        if self.a.is_zero:
            raise ValueError("affine map needs a != 0")

    @staticmethod
    def of(a, b=0) -> "AffineMap":
        return AffineMap(GaussRational.of(a), GaussRational.of(b))

    def __call__(self, z) -> GaussRational:
        return self.a * GaussRational.of(z) + self.b

    def compose_self(self, k: int) -> "AffineMap":
        """The k-fold composition: z -> a^k z + (a^(k-1) + ... + 1) b."""
        ak = self.a**k
        geo = GaussRational(_F0)
        for j in range(k):
            geo = geo + self.a**j
        return AffineMap(ak, geo * self.b)

    @staticmethod
    def rotation_about(a, center) -> "AffineMap":
        """z -> a (z - center) + center."""
        a = GaussRational.of(a)
        c = GaussRational.of(center)
        return AffineMap(a, c - a * c)


def _gauss_poly_of(phi: RatPoly) -> list[GaussRational]:
    return [GaussRational.of(c) for c in phi.coeffs]


def _compose_affine(phi: RatPoly, sigma: AffineMap) -> list[GaussRational]:
    """Coefficients of phi(sigma(z)) over Q(i), by Horner in a z + b."""
    acc: list[GaussRational] = []
    for c in reversed(_gauss_poly_of(phi)):
        # acc <- acc * (a z + b) + c
        nxt = [GaussRational(_F0)] * (len(acc) + 1)
        for k, u in enumerate(acc):
            nxt[k + 1] = nxt[k + 1] + u * sigma.a
            nxt[k] = nxt[k] + u * sigma.b
        nxt[0] = nxt[0] + c
        acc = nxt
    return acc or [GaussRational(_F0)]


def centroid(sys: DynSystem) -> Fraction:
    """The rotation center -a_{d-1} / (d a_d) of every Julia-set symmetry."""
    d = sys.d
    return -sys.phi.coefficient(d - 1) / (d * sys.leading)


def is_julia_symmetry(sys: DynSystem, sigma: AffineMap) -> bool:
    """Exact test of the functional equation phi o sigma = sigma^d o phi,
    which characterizes membership in the symmetry group."""
    lhs = _compose_affine(sys.phi, sigma)
    sd = sigma.compose_self(sys.d)
    rhs = [sd.a * GaussRational.of(c) for c in sys.phi.coeffs]
    rhs[0] = rhs[0] + sd.b
    n = max(len(lhs), len(rhs))
    lhs += [GaussRational(_F0)] * (n - len(lhs))
    rhs += [GaussRational(_F0)] * (n - len(rhs))
    return lhs == rhs


def centered_form(sys: DynSystem) -> RatPoly:
    """phi conjugated by translation to its centroid, killing the
    z^(d-1) coefficient."""
    z = centroid(sys)
    shifted = sys.phi.shift_arg(z) - RatPoly.constant(z)
    assert shifted.coefficient(sys.d - 1) == 0
    return shifted


@dataclass(frozen=True)
class SymmetryOrder:
    order: int | None  # None when the group is infinite
    infinite: bool


def rotation_symmetry_order(sys: DynSystem) -> SymmetryOrder:
    """Order of the rotation group of the Julia set.

    After centering, a rotation by a primitive root of unity w fixes the
    Julia set iff w^(d-k) = 1 for every k with a nonzero centered
    coefficient; the order is the gcd of those exponents, equivalently the
    largest n with centered phi = z^r psi(z^n).  A centered monomial is
    conjugate to z^d and has infinite symmetry group."""
    d = sys.d
    g = centered_form(sys)
    support = [k for k in range(d) if g.coefficient(k) != 0]
    if not support:
        return SymmetryOrder(None, True)
    n = 0
    for k in support:
        n = math.gcd(n, d - k)
    # Certify by re-expansion: coefficients vanish outside the z^r psi(z^n)
    # support pattern.
    r = d % n
    assert all(
        g.coefficient(k) == 0
        for k in range(d + 1)
        if (k - r) % n != 0
    ), "support certification failed"
    return SymmetryOrder(n, False)


def gaussian_rotations(sys: DynSystem, k: int) -> list[AffineMap]:
    """The rotations about the centroid by k-th roots of unity that live
    in Q(i): available exactly for k in {1, 2, 4}."""
    z = centroid(sys)
    units = {
        1: [GaussRational(_F1)],
        2: [GaussRational(_F1), GaussRational(Fraction(-1))],
        4: [GaussRational(_F1), I, GaussRational(Fraction(-1)), GaussRational(_F0, Fraction(-1))],
    }
    if k not in units:
        raise ValueError("Gaussian rotations exist only for k in {1, 2, 4}")
    return [AffineMap.rotation_about(u, z) for u in units[k]]
