"""Exact dense polynomial algebra over Q.

Composition, iteration, resultants, discriminants, pushforwards and
squarefree parts of polynomials with Fraction coefficients.  Resultants
go through a fraction-free subresultant remainder sequence on integer
polynomials, with the sign pinned to the Sylvester determinant; a Bareiss
elimination of the actual Sylvester matrix is kept alongside as the
definitional cross-check.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from . import config
from .errors import DegreeCapError, ParseError

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class RatPoly:
    """Dense polynomial over Q; coeffs[i] is the coefficient of z^i.

    The tuple carries no trailing zeros, so the zero polynomial is the
    empty tuple and degree is len(coeffs) - 1 otherwise.
    """

    coeffs: tuple[Fraction, ...]

    @staticmethod
    def from_coeffs(coeffs) -> "RatPoly":
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return RatPoly(tuple(cs))

    @staticmethod
    def zero() -> "RatPoly":
        return RatPoly(())

    @staticmethod
    def constant(c) -> "RatPoly":
        return RatPoly.from_coeffs([c])

    @staticmethod
    def identity() -> "RatPoly":
        return RatPoly.from_coeffs([0, 1])

    @staticmethod
    def monomial(k: int, c=1) -> "RatPoly":
        return RatPoly.from_coeffs([0] * k + [c])

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else _ZERO

    def __add__(self, other: "RatPoly") -> "RatPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return RatPoly.from_coeffs(
            [self.coefficient(i) + other.coefficient(i) for i in range(n)]
        )

    def __sub__(self, other: "RatPoly") -> "RatPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return RatPoly.from_coeffs(
            [self.coefficient(i) - other.coefficient(i) for i in range(n)]
        )

    def __neg__(self) -> "RatPoly":
        return RatPoly(tuple(-c for c in self.coeffs))

    def __mul__(self, other) -> "RatPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, RatPoly):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return RatPoly.zero()
        out = [_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] += a * b
        return RatPoly.from_coeffs(out)

    __rmul__ = __mul__

    def scale(self, c) -> "RatPoly":
        c = Fraction(c)
        if c == 0:
            return RatPoly.zero()
        return RatPoly(tuple(a * c for a in self.coeffs))

    def shift_arg(self, b: Fraction) -> "RatPoly":
        """The polynomial z -> self(z + b)."""
        return self.compose(RatPoly.from_coeffs([b, 1]))

    def __call__(self, x):
        """Horner evaluation; works for Fraction, complex and mpmath types
        (Fraction coefficients mix with all of them)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "RatPoly":
        return RatPoly.from_coeffs(
            [i * c for i, c in enumerate(self.coeffs)][1:]
        )

    def compose(self, inner: "RatPoly") -> "RatPoly":
        """self(inner(z)), exact."""
        acc = RatPoly.zero()
        for c in reversed(self.coeffs):
            acc = acc * inner + RatPoly.constant(c)
        return acc

    def divmod(self, other: "RatPoly") -> tuple["RatPoly", "RatPoly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q = [_ZERO] * max(0, self.degree - other.degree + 1)
        r = list(self.coeffs)
        dlead = other.leading
        while len(r) - 1 >= other.degree and any(r):
            while r and r[-1] == 0:
                r.pop()
            if len(r) - 1 < other.degree:
                break
            k = len(r) - 1 - other.degree
            factor = r[-1] / dlead
            q[k] = factor
            for i, c in enumerate(other.coeffs):
                r[k + i] -= factor * c
            r.pop()
        return RatPoly.from_coeffs(q), RatPoly.from_coeffs(r)

    def content_and_primitive(self) -> tuple[Fraction, "RatPoly"]:
        """Write self = c * F with F integer, content 1, positive leading."""
        if self.is_zero:
            raise ValueError("zero polynomial")
        den = reduce(math.lcm, (c.denominator for c in self.coeffs), 1)
        ints = [c.numerator * (den // c.denominator) for c in self.coeffs]
        g = reduce(math.gcd, (abs(n) for n in ints), 0)
        sign = -1 if ints[-1] < 0 else 1
        prim = RatPoly.from_coeffs([Fraction(n // (sign * g)) for n in ints])
        return Fraction(sign * g, den), prim

    def primitive_part(self) -> "RatPoly":
        return self.content_and_primitive()[1]

    def is_integer(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def is_monic(self) -> bool:
        return not self.is_zero and self.leading == 1

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @staticmethod
    def from_strings(items) -> "RatPoly":
        return RatPoly.from_coeffs([Fraction(s) for s in items])

    def __str__(self):
        return poly_to_string(self)

    def max_coeff_bits(self) -> int:
        """Upper bound on coefficient size, in bits (numerators and
        denominators)."""
        bits = 0
        for c in self.coeffs:
            bits = max(bits, c.numerator.bit_length(), c.denominator.bit_length())
        return bits


# ---------------------------------------------------------------------------
# Parsing and printing: "z^2 - 1/2*z + 3", "(z^3-z^2)/2"
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([a-zA-Z])|(\*\*|[-+*/^()]))")


def parse_poly(text: str, var: str = "z") -> RatPoly:
    """Parse a polynomial expression over Q in the given variable.

    Supports +, -, *, / (by constants), ^ or ** for integer powers, and
    parentheses, e.g. "(z^3 - z^2)/2" or "z^2 - 1/2*z + 3".
    """
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad character {text[pos]!r}", position=pos)
        if m.group(1):
            tokens.append(("int", m.group(1), pos))
        elif m.group(2):
            tokens.append(("var", m.group(2), pos))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(("op", op, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))

    idx = 0

    def peek():
        return tokens[idx]

    def take():
        nonlocal idx
        tok = tokens[idx]
        idx += 1
        return tok

    def parse_sum() -> RatPoly:
        node = parse_product()
        while peek()[:2] in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = parse_product()
            node = node + rhs if op == "+" else node - rhs
        return node

    def parse_product() -> RatPoly:
        node = parse_unary()
        while peek()[:2] in (("op", "*"), ("op", "/")):
            op = take()[1]
            rhs = parse_unary()
            if op == "*":
                node = node * rhs
            else:
                if rhs.degree > 0:
                    raise ParseError(
                        "division only by constants", position=peek()[2]
                    )
                if rhs.is_zero:
                    raise ParseError("division by zero", position=peek()[2])
                node = node.scale(1 / rhs.coeffs[0])
        return node

    def parse_unary() -> RatPoly:
        if peek()[:2] == ("op", "-"):
            take()
            return -parse_unary()
        if peek()[:2] == ("op", "+"):
            take()
            return parse_unary()
        return parse_power()

    def parse_power() -> RatPoly:
        base = parse_atom()
        if peek()[:2] == ("op", "^"):
            take()
            sign = 1
            if peek()[:2] == ("op", "-"):
                raise ParseError("negative exponent", position=peek()[2])
            kind, val, p = take()
            if kind != "int":
                raise ParseError("exponent must be an integer", position=p)
            exp = sign * int(val)
            acc = RatPoly.constant(1)
            for _ in range(exp):
                acc = acc * base
            return acc
        return base

    def parse_atom() -> RatPoly:
        kind, val, p = take()
        if kind == "int":
            return RatPoly.constant(Fraction(int(val)))
        if kind == "var":
            if val != var:
                raise ParseError(f"unknown variable {val!r}", position=p)
            return RatPoly.identity()
        if kind == "op" and val == "(":
            node = parse_sum()
            kind2, val2, p2 = take()
            if (kind2, val2) != ("op", ")"):
                raise ParseError("expected ')'", position=p2)
            return node
        raise ParseError(f"unexpected token {val!r}", position=p)

    result = parse_sum()
    kind, val, p = peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", position=p)
    return result


def poly_to_string(f: RatPoly, var: str = "z") -> str:
    if f.is_zero:
        return "0"
    parts = []
    for i in range(f.degree, -1, -1):
        c = f.coefficient(i)
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            zpow = var if i == 1 else f"{var}^{i}"
            body = zpow if mag == 1 else f"{mag}*{zpow}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------------------
# Composition and iteration
# ---------------------------------------------------------------------------


def compose(f: RatPoly, g: RatPoly) -> RatPoly:
    """f(g(z)), exact."""
    return f.compose(g)


def iterate(phi: RatPoly, n: int, cap: int | None = None) -> RatPoly:
    """The n-th functional iterate of phi, n >= 1."""
    if phi.degree < 1:
        raise ValueError("iteration needs degree >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    cap = config.degree_cap() if cap is None else cap
    if phi.degree >= 2 and phi.degree**n > cap:
        raise DegreeCapError("iterate degree cap")
    acc = phi
    for _ in range(n - 1):
        acc = acc.compose(phi)
    return acc


# ---------------------------------------------------------------------------
# Resultants
# ---------------------------------------------------------------------------


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of integer coefficient lists: rem(lc(b)^(da-db+1)*a, b)."""
    da, db = len(a) - 1, len(b) - 1
    lead = b[-1]
    r = list(a)
    for _ in range(da - db + 1):
        dr = len(r) - 1
        if dr < db:
            r = [c * lead for c in r]
            continue
        top = r[-1]
        r = [c * lead for c in r[:-1]]
        for i in range(db):
            r[dr - db + i] -= top * b[i]
        while r and r[-1] == 0:
            r.pop()
        if not r:
            break
    return r


def _int_resultant(a: list[int], b: list[int]) -> int:
    """Resultant of integer polynomials via the subresultant PRS.

    Sign convention is that of the Sylvester determinant; verified against
    Bareiss elimination of the actual matrix.
    """
    sign = 1
    if len(a) - 1 < len(b) - 1:
        if ((len(a) - 1) * (len(b) - 1)) % 2 == 1:
            sign = -sign
        a, b = b, a
    g, h = 1, 1
    while True:
        da, db = len(a) - 1, len(b) - 1
        if db == 0:
            break
        delta = da - db
        if da % 2 == 1 and db % 2 == 1:
            sign = -sign
        r = _prem(a, b)
        if not r:
            return 0
        denom = g * h**delta
        a, b = b, [c // denom for c in r]
        g = a[-1]
        if delta == 0:
            h = h  # h unchanged: h^(1-0) * g^0
        else:
            # h <- g^delta * h^(1-delta), exact in Z
            num = g**delta
            h = num // h ** (delta - 1) if delta > 1 else num
    da = len(a) - 1
    if da == 0:
        # both constants: resultant of constants is 1 by convention deg 0
        return sign
    num = b[-1] ** da
    res = num // h ** (da - 1) if da > 1 else num
    return sign * res


def sylvester_resultant(f: RatPoly, g: RatPoly) -> Fraction:
    """Resultant by Bareiss fraction-free elimination of the Sylvester
    matrix.  O((m+n)^3); the definitional route, used to pin the sign."""
    if f.is_zero or g.is_zero:
        if f.is_zero and g.is_zero:
            raise ValueError("resultant of two zero polynomials")
        other = g if f.is_zero else f
        return Fraction(1) if other.degree == 0 else Fraction(0)
    m, n = f.degree, g.degree
    if m == 0:
        return f.coeffs[0] ** n
    if n == 0:
        return g.coeffs[0] ** m
    size = m + n
    mat = [[Fraction(0)] * size for _ in range(size)]
    for row in range(n):
        for i, c in enumerate(reversed(f.coeffs)):
            mat[row][row + i] = c
    for row in range(m):
        for i, c in enumerate(reversed(g.coeffs)):
            mat[n + row][row + i] = c
    sign = 1
    prev = Fraction(1)
    for k in range(size - 1):
        if mat[k][k] == 0:
            for r in range(k + 1, size):
                if mat[r][k] != 0:
                    mat[k], mat[r] = mat[r], mat[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                mat[i][j] = (mat[k][k] * mat[i][j] - mat[i][k] * mat[k][j]) / prev
            mat[i][k] = Fraction(0)
        prev = mat[k][k]
    return sign * mat[size - 1][size - 1]


def resultant(f: RatPoly, g: RatPoly) -> Fraction:
    """Exact resultant Res(f, g) with the Sylvester sign convention."""
    if f.is_zero or g.is_zero:
        if f.is_zero and g.is_zero:
            raise ValueError("resultant of two zero polynomials")
        other = g if f.is_zero else f
        return Fraction(1) if other.degree == 0 else Fraction(0)
    if f.degree == 0:
        return f.coeffs[0] ** g.degree
    if g.degree == 0:
        return g.coeffs[0] ** f.degree
    cf, F = f.content_and_primitive()
    cg, G = g.content_and_primitive()
    raw = _int_resultant(
        [c.numerator for c in F.coeffs], [c.numerator for c in G.coeffs]
    )
    return cf**g.degree * cg**f.degree * Fraction(raw)


# ---------------------------------------------------------------------------
# GCDs and squarefree parts
# ---------------------------------------------------------------------------

_GCD_CERT_PRIMES = (2147483647, 2147483629, 2147483587)


def _gcd_mod(f: RatPoly, g: RatPoly, q: int) -> int | None:
    """Degree of gcd(f, g) over F_q, or None if q divides a leading
    coefficient (bad reduction for this certificate)."""
    a = [c.numerator * pow(c.denominator, -1, q) % q for c in f.coeffs]
    b = [c.numerator * pow(c.denominator, -1, q) % q for c in g.coeffs]
    if not a or not b or a[-1] % q == 0 or b[-1] % q == 0:
        return None
    while b and any(b):
        while b and b[-1] % q == 0:
            b.pop()
        if not b:
            break
        inv = pow(b[-1], -1, q)
        while len(a) >= len(b):
            if a[-1] % q == 0:
                a.pop()
                if not a:
                    return len(b) - 1
                continue
            k = len(a) - len(b)
            factor = a[-1] * inv % q
            for i in range(len(b)):
                a[k + i] = (a[k + i] - factor * b[i]) % q
            a.pop()
        a, b = b, a
    return len(a) - 1


def poly_gcd(f: RatPoly, g: RatPoly) -> RatPoly:
    """Monic gcd over Q."""
    if f.is_zero:
        return g if g.is_zero else g.scale(1 / g.leading)
    if g.is_zero:
        return f.scale(1 / f.leading)
    # Fast certificate: coprime mod one good prime implies coprime over Q.
    for q in _GCD_CERT_PRIMES:
        try:
            d = _gcd_mod(f, g, q)
        except ValueError:
            d = None
        if d == 0:
            return RatPoly.constant(1)
        if d is not None:
            break
    a, b = f, g
    while not b.is_zero:
        _, r = a.divmod(b)
        a, b = b, r if r.is_zero else r.scale(1 / r.leading)
    return a.scale(1 / a.leading)


def squarefree_part(f: RatPoly) -> RatPoly:
    """f / gcd(f, f'), normalized to integer coefficients of content 1
    with positive leading coefficient."""
    if f.is_zero:
        raise ValueError("zero polynomial")
    if f.degree == 0:
        return RatPoly.constant(1)
    g = poly_gcd(f, f.derivative())
    q, r = f.divmod(g)
    assert r.is_zero
    return q.primitive_part()


def squarefree_decomposition(f: RatPoly) -> list[tuple[RatPoly, int]]:
    """Yun decomposition: f = lc * prod g_k^k with the g_k squarefree and
    pairwise coprime.  Returns [(g_k, k)] for the nonconstant g_k."""
    if f.is_zero:
        raise ValueError("zero polynomial")
    f = f.scale(1 / f.leading)
    out: list[tuple[RatPoly, int]] = []
    df = f.derivative()
    a = poly_gcd(f, df)
    b, _ = f.divmod(a)
    c, _ = df.divmod(a)
    k = 1
    while b.degree > 0:
        d = c - b.derivative()
        g = poly_gcd(b, d)
        if g.degree > 0:
            out.append((g, k))
        b, _ = b.divmod(g)
        c, _ = d.divmod(g)
        k += 1
    return out


# ---------------------------------------------------------------------------
# Galois-stable sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaloisSet:
    """A finite Galois-stable subset of Qbar, represented by a squarefree
    primitive integer polynomial with positive leading coefficient."""

    poly: RatPoly

    @staticmethod
    def from_poly(f: RatPoly) -> "GaloisSet":
        if f.is_zero or f.degree < 1:
            raise ValueError("need a nonconstant polynomial")
        return GaloisSet(squarefree_part(f))

    @staticmethod
    def from_rationals(xs) -> "GaloisSet":
        xs = [Fraction(x) for x in xs]
        if not xs:
            raise ValueError("empty set")
        if len(set(xs)) != len(xs):
            raise ValueError("repeated points")
        f = RatPoly.constant(1)
        for x in xs:
            f = f * RatPoly.from_coeffs([-x, 1])
        return GaloisSet(f.primitive_part())

    @property
    def cardinality(self) -> int:
        return self.poly.degree

    def rational_points(self) -> list[Fraction]:
        """The rational elements (degree-1 factors found by rational root
        search on the defining polynomial)."""
        f = self.poly
        out = []
        lead = f.leading.numerator
        const = f.coeffs[0].numerator
        if const == 0:
            out.append(Fraction(0))
            # peel the zero root
            f = RatPoly.from_coeffs(f.coeffs[1:])
            const = f.coeffs[0].numerator
        from .places import factorize

        def divisors(n):
            ds = {1}
            for p, e in factorize(n).items():
                ds = {d * p**k for d in ds for k in range(e + 1)}
            return ds

        if const and lead:
            for num in divisors(abs(const)):
                for den in divisors(abs(lead)):
                    for cand in (Fraction(num, den), Fraction(-num, den)):
                        if f(cand) == 0:
                            out.append(cand)
        return sorted(set(out))


def discriminant_pairproduct(S: GaloisSet) -> Fraction:
    """Delta = prod over ordered pairs of distinct roots of (x - y).

    Computed as Res(f, f') / lc^(2N-1); the sign matches the brute-force
    ordered-pair product over the roots.
    """
    f = S.poly
    n = f.degree
    if n < 2:
        raise ValueError("need two points")
    return resultant(f, f.derivative()) / f.leading ** (2 * n - 1)


def pairproduct_of_poly(f: RatPoly) -> Fraction:
    """Ordered pair product of roots of any squarefree f (not necessarily
    normalized); scale-invariant."""
    n = f.degree
    if n < 2:
        raise ValueError("need two points")
    return resultant(f, f.derivative()) / f.leading ** (2 * n - 1)


# ---------------------------------------------------------------------------
# Images of sets under polynomial maps
# ---------------------------------------------------------------------------


def _lagrange_interpolate(points: list[tuple[Fraction, Fraction]]) -> RatPoly:
    """Exact interpolation through distinct rational points."""
    out = RatPoly.zero()
    for i, (xi, yi) in enumerate(points):
        num = RatPoly.constant(1)
        den = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            num = num * RatPoly.from_coeffs([-xj, 1])
            den *= xi - xj
        out = out + num.scale(yi / den)
    return out


def multiset_image_poly(f: RatPoly, phi: RatPoly) -> RatPoly:
    """The degree-N polynomial whose root multiset is {phi(alpha)} over the
    root multiset of f; multiplicities are preserved.

    This is Res_z(f(z), w - phi(z)) as a polynomial in w, computed by exact
    evaluation-interpolation, then made primitive (scaling does not change
    the roots).
    """
    if phi.degree < 1:
        raise ValueError("need deg phi >= 1")
    n = f.degree
    if n < 1:
        raise ValueError("need a nonconstant polynomial")
    pts = []
    for k in range(n + 1):
        w = Fraction(k)
        g = RatPoly.constant(w) - phi
        pts.append((w, resultant(f, g)))
    img = _lagrange_interpolate(pts)
    # Degree must be exactly n with leading lc(f)^deg(phi).
    assert img.degree == n, "image polynomial degree mismatch"
    return img.primitive_part()


def pushforward(S: GaloisSet, phi: RatPoly) -> GaloisSet:
    """The set phi(S) (multiplicities collapsed)."""
    if phi.degree < 1:
        raise ValueError("need deg phi >= 1")
    return GaloisSet.from_poly(multiset_image_poly(S.poly, phi))


@dataclass(frozen=True)
class PeriodicSet:
    """Points of period dividing n, with the separability report."""

    points: GaloisSet
    separable: bool
    full_count: int  # d^n, the count when phi^n(z) - z is separable


def periodic_set(phi: RatPoly, n: int, cap: int | None = None) -> PeriodicSet:
    """The Galois set of roots of phi^n(z) - z, plus whether that
    polynomial was already separable (so its root count is deg(phi)^n)."""
    if phi.degree < 2:
        raise ValueError("need deg phi >= 2")
    g = iterate(phi, n, cap=cap) - RatPoly.identity()
    S = GaloisSet.from_poly(g)
    return PeriodicSet(S, S.cardinality == g.degree, g.degree)


def preimage_set(phi: RatPoly, n: int, a: Fraction, cap: int | None = None) -> GaloisSet:
    """The Galois set of n-th preimages of a under phi."""
    if phi.degree < 2:
        raise ValueError("need deg phi >= 2")
    g = iterate(phi, n, cap=cap) - RatPoly.constant(Fraction(a))
    return GaloisSet.from_poly(g)
