"""Dense univariate polynomials over Q as low-first Fraction tuples.

Just enough arithmetic for division polynomials, duplication forms and
extended-gcd cofactor bounds; not a general polynomial library.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DomainError

Poly = tuple  # tuple[Fraction, ...], coeffs[i] is the x^i coefficient


def poly(*coeffs) -> Poly:
    """Build from low-first coefficients, trimming trailing zeros."""
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def deg(f: Poly) -> int:
    return len(f) - 1  # deg(0) = -1 by convention


def padd(f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    return poly(*[(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)])


def psub(f: Poly, g: Poly) -> Poly:
    return padd(f, pscale(g, -1))


def pscale(f: Poly, c) -> Poly:
    c = Fraction(c)
    return poly(*[a * c for a in f])


def pmul(f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return ()
    out = [Fraction(0)] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly(*out)


def pdivmod(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    if not g:
        raise DomainError("polynomial division by zero")
    q = [Fraction(0)] * max(len(f) - len(g) + 1, 0)
    r = list(f)
    while len(r) >= len(g) and any(r):
        while r and r[-1] == 0:
            r.pop()
        if len(r) < len(g):
            break
        c = r[-1] / g[-1]
        k = len(r) - len(g)
        q[k] = c
        for j, b in enumerate(g):
            r[k + j] -= c * b
        r.pop()
    return poly(*q), poly(*r)


def pexactdiv(f: Poly, g: Poly) -> Poly:
    q, r = pdivmod(f, g)
    if r:
        raise DomainError("inexact polynomial division")
    return q


def pgcdex(f: Poly, g: Poly) -> tuple[Poly, Poly, Poly]:
    """(s, t, d) with s*f + t*g = d, d the monic gcd (or zero)."""
    r0, r1 = f, g
    s0, s1 = poly(1), poly()
    t0, t1 = poly(), poly(1)
    while r1:
        q, r = pdivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, psub(s0, pmul(q, s1))
        t0, t1 = t1, psub(t0, pmul(q, t1))
    if r0:
        lead = r0[-1]
        r0, s0, t0 = pscale(r0, 1 / lead), pscale(s0, 1 / lead), pscale(t0, 1 / lead)
    return s0, t0, r0


def peval(f: Poly, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(f):
        acc = acc * x + c
    return acc


def coeff_abs_sum(f: Poly) -> Fraction:
    return sum((abs(c) for c in f), Fraction(0))
