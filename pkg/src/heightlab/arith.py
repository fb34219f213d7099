"""Exact rational arithmetic over Q: places, valuations, factorization.

Conventions frozen here and used by every other module:

* rationals are `fractions.Fraction` (gcd-reduced, positive denominator);
* a place of Q is either a finite prime p or the archimedean place;
* |q|_p = p^(-v_p(q)), |q|_inf = |q|, so the product formula reads
  sum_v log|q|_v = 0 for q != 0;
* logarithms are natural; floating point is mpmath with an explicit
  decimal-digit precision parameter (default 50).

Only places of Q are supported; there is no extension-field weighting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import sympy

from .errors import DomainError, FactorizationIncomplete, InputError, ParseError

DEFAULT_PRECISION = 50
DEFAULT_FACTOR_BOUND = 10**6

Rational = Fraction


def as_rational(q) -> Fraction:
    """Coerce int/str/Fraction into an exact rational; floats are refused."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, str):
        try:
            return Fraction(q.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {q!r}") from exc
    raise InputError(f"expected an exact rational, got {type(q).__name__}")


def rational_str(q: Fraction) -> str:
    """Serialize p/q; integers drop the denominator (matches the JSON forms)."""
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_prime(n: int) -> bool:
    # sympy.isprime: deterministic BPSW, proven for n < 2^64; desk scale here.
    return sympy.isprime(n)


@lru_cache(maxsize=8)
def _sieve(bound: int):
    flags = bytearray([1]) * (bound + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(bound**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i in range(2, bound + 1) if flags[i]]


def factorize(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> dict[int, int]:
    """Factor a nonzero integer: trial division to `bound`, then the cofactor
    must be a certified prime (or a perfect power of one), else a structured
    FactorizationIncomplete is raised."""
    if n == 0:
        raise DomainError("cannot factor 0")
    n0, n = n, abs(n)
    out: dict[int, int] = {}
    for p in _sieve(bound):
        if p * p > n:
            break
        if n % p == 0:
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
    if n > 1:
        if n <= bound * bound or is_prime(n):
            # below bound^2 the remaining cofactor has no factor <= bound,
            # hence is prime
            out[n] = out.get(n, 0) + 1
        else:
            for k in range(2, n.bit_length() + 1):
                r, exact = sympy.integer_nthroot(n, k)
                if exact and is_prime(r):
                    out[r] = out.get(r, 0) + k
                    return out
            raise FactorizationIncomplete(n0, n, bound)
    return out


def factorize_rational(q: Fraction, bound: int = DEFAULT_FACTOR_BOUND) -> dict[int, int]:
    """Prime -> exponent map of a nonzero rational (negative exponents for the
    denominator); the sign is discarded."""
    q = as_rational(q)
    if q == 0:
        raise DomainError("cannot factor 0")
    out = {} if abs(q.numerator) == 1 else dict(factorize(q.numerator, bound))
    if q.denominator != 1:
        for p, e in factorize(q.denominator, bound).items():
            out[p] = out.get(p, 0) - e
    return {p: e for p, e in sorted(out.items()) if e != 0}


@dataclass(frozen=True, order=True)
class Place:
    """A place of Q: finite(p) for a prime p, or the archimedean place (p=None).

    Ordering puts finite places first by p, archimedean last (sort key via
    tuple); string form is "2", "3", ... or "inf".
    """

    sort_index: int
    p: int | None

    @classmethod
    def finite(cls, p: int) -> "Place":
        if not isinstance(p, int) or p < 2 or not is_prime(p):
            raise InputError(f"not a prime: {p}")
        return cls(0, p)

    @classmethod
    def archimedean(cls) -> "Place":
        return cls(1, None)

    @property
    def is_finite(self) -> bool:
        return self.p is not None

    def __str__(self) -> str:
        return "inf" if self.p is None else str(self.p)

    @classmethod
    def parse(cls, s: str) -> "Place":
        s = s.strip()
        if s in ("inf", "oo", "infinity"):
            return cls.archimedean()
        try:
            return cls.finite(int(s))
        except ValueError as exc:
            raise ParseError(f"not a place: {s!r}") from exc


def padic_valuation(q, p: int) -> int:
    """v_p(q) for q != 0; p must be prime.  No factorization involved."""
    if not isinstance(p, int) or p < 2 or not is_prime(p):
        raise InputError(f"not a prime: {p}")
    q = as_rational(q)
    if q == 0:
        raise DomainError("v_p(0) is undefined")
    v = 0
    n = abs(q.numerator)
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


class ValuationVector:
    """Finite-support map prime -> rational exponent; the abelian-group value
    of q in the product of p-adic value groups, sign discarded.

    Supports exact addition/negation/rational scaling (the operations a
    Gm-fiber class needs).  Zero exponents are never stored.
    """

    __slots__ = ("_m",)

    def __init__(self, mapping=None):
        m = {}
        for p, e in (mapping or {}).items():
            if not isinstance(p, int) or p < 2 or not is_prime(p):
                raise InputError(f"not a prime: {p}")
            e = as_rational(e)
            if e != 0:
                m[p] = e
        self._m = dict(sorted(m.items()))

    @classmethod
    def zero(cls) -> "ValuationVector":
        return cls({})

    def items(self):
        return self._m.items()

    def get(self, p: int) -> Fraction:
        return self._m.get(p, Fraction(0))

    def support(self):
        return tuple(self._m)

    def __bool__(self):
        return bool(self._m)

    def __eq__(self, other):
        return isinstance(other, ValuationVector) and self._m == other._m

    def __hash__(self):
        return hash(tuple(self._m.items()))

    def __add__(self, other: "ValuationVector") -> "ValuationVector":
        m = dict(self._m)
        for p, e in other.items():
            m[p] = m.get(p, Fraction(0)) + e
        return ValuationVector(m)

    def __neg__(self) -> "ValuationVector":
        return ValuationVector({p: -e for p, e in self._m.items()})

    def __sub__(self, other: "ValuationVector") -> "ValuationVector":
        return self + (-other)

    def scale(self, c) -> "ValuationVector":
        c = as_rational(c)
        return ValuationVector({p: c * e for p, e in self._m.items()})

    def __repr__(self):
        inner = ", ".join(f"{p}: {rational_str(e)}" for p, e in self._m.items())
        return "ValuationVector({%s})" % inner

    def to_json(self) -> dict:
        return {str(p): rational_str(e) for p, e in self._m.items()}

    @classmethod
    def from_json(cls, obj: dict) -> "ValuationVector":
        try:
            return cls({int(p): as_rational(e) for p, e in obj.items()})
        except (AttributeError, ValueError) as exc:
            raise ParseError(f"not a valuation vector: {obj!r}") from exc


def valuation_vector(q, bound: int = DEFAULT_FACTOR_BOUND) -> ValuationVector:
    """Full valuation vector of a nonzero rational (units give the empty map)."""
    q = as_rational(q)
    if q == 0:
        raise DomainError("valuation vector of 0 is undefined")
    return ValuationVector(factorize_rational(q, bound))


def working_dps(precision: int) -> int:
    if precision < 1:
        raise InputError("precision must be >= 1")
    return precision + 15


def place_log_norm(q, place: Place, precision: int = DEFAULT_PRECISION):
    """log|q|_v as an mpf: -v_p(q) log p at finite v, log|q| at the
    archimedean place.  q must be nonzero."""
    q = as_rational(q)
    if q == 0:
        raise DomainError("log|0|_v is undefined")
    with mpmath.workdps(working_dps(precision)):
        if place.is_finite:
            return -padic_valuation(q, place.p) * mpmath.log(place.p)
        return mpmath.log(abs(mpmath.mpf(q.numerator)) / q.denominator)


def contributing_places(q, bound: int = DEFAULT_FACTOR_BOUND) -> list[Place]:
    """Places where |q|_v != 1 plus the archimedean place, sorted."""
    vv = valuation_vector(q, bound)
    return [Place.finite(p) for p in vv.support()] + [Place.archimedean()]


def product_formula_defect(q, precision: int = DEFAULT_PRECISION):
    """sum_v log|q|_v over contributing places; exactly 0 in exact arithmetic,
    so the returned mpf is a numeric sanity value near 0."""
    q = as_rational(q)
    if q == 0:
        raise DomainError("product formula needs q != 0")
    with mpmath.workdps(working_dps(precision)):
        total = mpmath.mpf(0)
        for v in contributing_places(q):
            total += place_log_norm(q, v, precision)
        return total
