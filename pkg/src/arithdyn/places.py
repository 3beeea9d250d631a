"""Places of Q: absolute values, valuations, and the product formula.

The scalar everywhere exactness matters is `fractions.Fraction`.  A place
is either the archimedean absolute value or the p-adic one attached to a
prime p.  Logarithmic magnitudes are kept symbolic, as formal rational
combinations of log p over distinct primes, so that global identities
(product formula, capacity products, discriminant cancellations) can be
verified exactly rather than within a float tolerance.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

Rational = Fraction

# Deterministic Miller-Rabin witness set: correct for all n < 3.3e24,
# which covers the 2^64 certification threshold.
_MR_WITNESSES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_ROUNDS_LARGE = 64

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _miller_rabin_round(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Primality test: deterministic below 2^64, 64 Miller-Rabin rounds
    (with witnesses derived deterministically from n) above."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        witnesses: Iterable[int] = _MR_WITNESSES_64
    else:
        rng = random.Random(n)
        witnesses = (rng.randrange(2, n - 1) for _ in range(_MR_ROUNDS_LARGE))
    return all(_miller_rabin_round(n, a, d, s) for a in witnesses)


def _brent_rho(n: int) -> int:
    """Find a nontrivial factor of composite odd n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| (n != 0) as {prime: exponent}."""
    if n == 0:
        raise ValueError("cannot factor zero")
    n = abs(n)
    factors: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    # Trial division up to 10^4 catches everything desk-scale inputs
    # usually contain; Brent rho handles the large cofactors.
    f = 53
    while f * f <= n and f < 10_000:
        while n % f == 0:
            factors[f] = factors.get(f, 0) + 1
            n //= f
        f += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        root = math.isqrt(m)
        if root * root == m:
            stack.extend((root, root))
            continue
        d = _brent_rho(m)
        stack.extend((d, m // d))
    return factors


def padic_valuation(x, p: int) -> int:
    """v_p(x) for a nonzero int or Fraction."""
    if x == 0:
        raise ZeroDivisionError("valuation of zero")
    if isinstance(x, Fraction):
        return padic_valuation(x.numerator, p) - padic_valuation(x.denominator, p)
    n, v = abs(x), 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class Place:
    """A place of Q: archimedean (prime None) or finite at a prime."""

    prime: int | None

    def __post_init__(self):
        if self.prime is not None and not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")

    @staticmethod
    def archimedean() -> "Place":
        return Place(None)

    @staticmethod
    def finite(p: int) -> "Place":
        return Place(p)

    @property
    def is_arch(self) -> bool:
        return self.prime is None

    def sort_key(self):
        return (0, 0) if self.prime is None else (1, self.prime)

    def __str__(self):
        return "inf" if self.prime is None else str(self.prime)


def parse_place(text: str) -> Place:
    text = text.strip().lower()
    if text in ("inf", "infty", "infinity", "oo", "arch"):
        return Place.archimedean()
    return Place.finite(int(text))


class LogAbs:
    """A logarithmic magnitude.

    Represented as a formal sum sum_p c_p * log(p) over distinct primes
    (coefficients are Fractions) plus an optional float part.  Purely
    exact values have `approx is None`; zero-coefficient terms are
    dropped, so the exact zero is the empty sum.  Sums over distinct
    primes stay symbolic and are never collapsed to floats unless
    `to_float` is called.
    """

    __slots__ = ("terms", "approx")

    def __init__(self, terms=(), approx: float | None = None):
        merged: dict[int, Fraction] = {}
        for prime, coeff in terms:
            coeff = Fraction(coeff)
            if coeff:
                merged[prime] = merged.get(prime, Fraction(0)) + coeff
                if not merged[prime]:
                    del merged[prime]
        self.terms = tuple(sorted(merged.items()))
        self.approx = float(approx) if approx is not None else None

    @staticmethod
    def exact(coeff, prime: int) -> "LogAbs":
        return LogAbs(((prime, Fraction(coeff)),))

    @staticmethod
    def zero() -> "LogAbs":
        return LogAbs()

    @staticmethod
    def from_float(value: float) -> "LogAbs":
        return LogAbs((), value)

    @property
    def is_exact(self) -> bool:
        return self.approx is None

    @property
    def is_exact_zero(self) -> bool:
        return self.approx is None and not self.terms

    def coefficient(self, prime: int) -> Fraction:
        for q, c in self.terms:
            if q == prime:
                return c
        return Fraction(0)

    def to_float(self) -> float:
        total = sum(float(c) * math.log(p) for p, c in self.terms)
        if self.approx is not None:
            total += self.approx
        return total

    def __add__(self, other: "LogAbs") -> "LogAbs":
        if not isinstance(other, LogAbs):
            return NotImplemented
        if self.approx is None and other.approx is None:
            approx = None
        else:
            approx = (self.approx or 0.0) + (other.approx or 0.0)
        return LogAbs(self.terms + other.terms, approx)

    def __neg__(self) -> "LogAbs":
        return LogAbs(
            tuple((p, -c) for p, c in self.terms),
            None if self.approx is None else -self.approx,
        )

    def __sub__(self, other: "LogAbs") -> "LogAbs":
        return self + (-other)

    def __mul__(self, scalar) -> "LogAbs":
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        scalar = Fraction(scalar)
        return LogAbs(
            tuple((p, c * scalar) for p, c in self.terms),
            None if self.approx is None else self.approx * float(scalar),
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, LogAbs)
            and self.terms == other.terms
            and self.approx == other.approx
        )

    def __hash__(self):
        return hash((self.terms, self.approx))

    def __repr__(self):
        parts = [f"{c}*log({p})" for p, c in self.terms]
        if self.approx is not None:
            parts.append(f"{self.approx!r}")
        return "LogAbs(" + (" + ".join(parts) if parts else "0") + ")"

    def to_json(self) -> dict:
        return {
            "terms": [{"coeff": str(c), "prime": p} for p, c in self.terms],
            "approx": self.approx,
        }

    @staticmethod
    def from_json(data: dict) -> "LogAbs":
        terms = tuple(
            (int(t["prime"]), Fraction(t["coeff"])) for t in data.get("terms", [])
        )
        return LogAbs(terms, data.get("approx"))


def log_abs(x: Fraction, v: Place) -> LogAbs:
    """log|x|_v for nonzero rational x.

    Finite p: the exact value -v_p(x) * log p.  Archimedean: a float.
    Callers needing the v(0) = +infinity convention must handle x = 0
    themselves.
    """
    x = Fraction(x)
    if x == 0:
        raise ZeroDivisionError("valuation of zero")
    if v.is_arch:
        return LogAbs.from_float(
            math.log(abs(x.numerator)) - math.log(x.denominator)
        )
    return LogAbs.exact(-padic_valuation(x, v.prime), v.prime)


def log_abs_exact_arch(x: Fraction) -> LogAbs:
    """log|x|_inf as an exact formal sum over the primes of x.

    Since |x| = prod p^{v_p(x)}, the archimedean log is representable
    symbolically; this is what makes product-formula cancellations exact.
    """
    x = Fraction(x)
    if x == 0:
        raise ZeroDivisionError("valuation of zero")
    terms = []
    for p, e in factorize(x.numerator).items():
        terms.append((p, Fraction(e)))
    for p, e in factorize(x.denominator).items():
        terms.append((p, Fraction(-e)))
    return LogAbs(terms)


def product_formula_check(x: Fraction) -> bool:
    """Exact check of sum_v log|x|_v = 0 over all places of Q.

    Carried out symbolically on prime-exponent vectors: the finite-place
    contributions are -v_p(x) log p for each prime of x, and the
    archimedean one is the formal factorization sum.  No floats.
    """
    x = Fraction(x)
    if x == 0:
        raise ZeroDivisionError("valuation of zero")
    total = log_abs_exact_arch(x)
    primes = set(factorize(x.numerator)) | set(factorize(x.denominator))
    for p in sorted(primes):
        total = total + log_abs(x, Place.finite(p))
    return total.is_exact_zero


def relevant_places(xs: Iterable[Fraction]) -> list[Place]:
    """The archimedean place plus every finite place at which some x has
    nonunit absolute value (i.e. primes of a numerator or denominator)."""
    primes: set[int] = set()
    for x in xs:
        x = Fraction(x)
        if x == 0:
            raise ZeroDivisionError("valuation of zero")
        primes |= set(factorize(x.numerator))
        primes |= set(factorize(x.denominator))
    return [Place.archimedean()] + [Place.finite(p) for p in sorted(primes)]


def parse_rational(text: str) -> Fraction:
    """Parse 'a/b' or a decimal integer literal."""
    from .errors import ParseError

    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}: {exc}") from exc
