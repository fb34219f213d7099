"""Canonical heights over Q and their decomposition into local terms.

Conventions, fixed once for the whole package:

* The canonical height is the x-coordinate limit  lim 4^-n h_x(2^n P),
  where h_x(a/b) = log max(|a|, |b|) in lowest terms.  It vanishes exactly
  on torsion and satisfies h(nP) = n^2 h(P).
* Local heights are the locally bounded solutions of the duplication
  equation with no constant term,

      lam_v(2P) = 4 lam_v(P) - log |S(x(P))|_v,

  where S(x) = 4x^3 + b2 x^2 + 2 b4 x + b6 is the square of the 2-division
  value.  With this choice the decomposition is exact:  sum_v lam_v = h,
  by the product formula applied to S(x(P)).
* Local heights always refer to the global minimal model; points on other
  models are moved there first.  The total height does not depend on the
  model.

Two independent evaluation routes are provided and kept deliberately
separate so they can check one another:

* `canonical_height_doubling` iterates the duplication map on the
  projective pair (a : b) = x, carrying a floating normalized pair for the
  archimedean size and per-prime residues at the finitely many primes that
  can divide gcd(A, B), with a proven cap on each gcd exponent.  The tail
  of the telescoped series is bounded by explicit constants from a pair of
  Bezout identities, so the result is certified.
* `canonical_height_localsum` computes every finite local height in closed
  form as an exact rational multiple of log p (formal-group depth for
  points reducing to the origin, zero on the rest of the smooth locus,
  a division-polynomial correction past singular reduction, and a cyclic
  identity for torsion), plus one archimedean backward telescope.

Finite local heights are exact rationals times log p; only the archimedean
place is genuinely numeric.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import mpmath as mp

from .arith import (
    DEFAULT_PRECISION,
    Place,
    factorize,
    factorize_rational,
    padic_valuation,
    working_dps,
)
from .curves import ECPoint, WeierstrassCurve
from .errors import DomainError, HeightlabError, PointError, ResourceError
from .polys import coeff_abs_sum, pgcdex, poly

_HEIGHT_DATA = {}


def _duplication_polys(curve):
    """(N, S) with x(2P) = N(x(P)) / S(x(P)) on the curve."""
    n_poly = poly(-curve.b8, -2 * curve.b6, -curve.b4, 0, 1)
    s_poly = curve.psi2_squared_poly
    return n_poly, s_poly


class _HeightData:
    """Per-curve constants for both height routes; curve must be minimal."""

    def __init__(self, curve: WeierstrassCurve):
        self.curve = curve
        self.n_poly, self.s_poly = _duplication_polys(curve)
        # homogeneous duplication pair, integer coefficients, degree 4:
        #   A(a,b) = a^4 - b4 a^2 b^2 - 2 b6 a b^3 - b8 b^4
        #   B(a,b) = 4 a^3 b + b2 a^2 b^2 + 2 b4 a b^3 + b6 b^4
        b2, b4, b6, b8 = (int(curve.b2), int(curve.b4), int(curve.b6), int(curve.b8))
        self.acoef = (1, 0, -b4, -2 * b6, -b8)
        self.bcoef = (0, 4, b2, 2 * b4, b6)
        self.coeff_bound = max(
            Fraction(1 + abs(b4) + 2 * abs(b6) + abs(b8)),
            Fraction(4 + abs(b2) + 2 * abs(b4) + abs(b6)),
        )
        # Bezout certificates on the two projective patches.  On |x| <= 1,
        # s N + t S = 1 bounds max(|N|, |S|) below; reversing the forms
        # covers |x| >= 1.  They also bound gcd(A(a,b), B(a,b)) for coprime
        # integer pairs, which is what makes the doubling route finite.
        s1, t1, d1 = pgcdex(self.n_poly, self.s_poly)
        rev_n = poly(1, 0, -b4, -2 * b6, -b8)
        rev_s = poly(0, 4, b2, 2 * b4, b6)
        s2, t2, d2 = pgcdex(rev_n, rev_s)
        if d1 != poly(1) or d2 != poly(1):
            raise HeightlabError("duplication pair is not coprime")  # pragma: no cover
        self.patch_floor = min(
            1 / (coeff_abs_sum(s1) + coeff_abs_sum(t1)),
            1 / (coeff_abs_sum(s2) + coeff_abs_sum(t2)),
        )
        self.gcd_caps = _gcd_exponent_caps(s1, t1, s2, t2)
        self.gcd_bound = 1
        for p, e in self.gcd_caps.items():
            self.gcd_bound *= p**e
        self.bad_primes = tuple(sorted(factorize(abs(int(curve.discriminant)))))

    def log_envelope(self):
        """max(|log| of the normalized duplication size), as an mpf."""
        lo = self.patch_floor
        hi = self.coeff_bound
        return max(-_log_fraction(lo), _log_fraction(hi))


def _gcd_exponent_caps(s1, t1, s2, t2):
    d1 = lcm(*(c.denominator for c in s1 + t1)) if (s1 + t1) else 1
    d2 = lcm(*(c.denominator for c in s2 + t2)) if (s2 + t2) else 1
    caps = {}
    for d in (d1, d2):
        for p, e in factorize(d).items():
            caps[p] = max(caps.get(p, 0), e)
    return caps


def _height_data(curve: WeierstrassCurve) -> _HeightData:
    key = curve.ainvs
    if key not in _HEIGHT_DATA:
        _HEIGHT_DATA[key] = _HeightData(curve)
    return _HEIGHT_DATA[key]


def _log_fraction(q: Fraction):
    return mp.log(mp.mpf(q.numerator)) - mp.log(mp.mpf(q.denominator))


def _to_minimal(curve: WeierstrassCurve, point: ECPoint):
    curve.require_point(point)
    e_min, m = curve.minimal_model()
    return e_min, m.push(point), m


def naive_x_height(point: ECPoint, precision: int | None = None):
    """log of the multiplicative height of the x-coordinate."""
    if point.is_infinity:
        raise DomainError("the zero point has no x-coordinate")
    prec = precision or DEFAULT_PRECISION
    with mp.workdps(working_dps(prec)):
        a, b = point.x.numerator, point.x.denominator
        return mp.log(mp.mpf(max(abs(a), b)))


# -- route one: projective doubling with certified tail ----------------------


def _eval_pair_float(data, u, v):
    u2, v2 = u * u, v * v
    u3, v3 = u2 * u, v2 * v
    a = u2 * u2 + data.acoef[2] * u2 * v2 + data.acoef[3] * u * v3 + data.acoef[4] * v2 * v2
    b = 4 * u3 * v + data.bcoef[2] * u2 * v2 + data.bcoef[3] * u * v3 + data.bcoef[4] * v2 * v2
    return a, b


def _eval_pair_mod(data, a, b, modulus):
    a2, b2 = a * a % modulus, b * b % modulus
    a3, b3 = a2 * a % modulus, b2 * b % modulus
    av = (a2 * a2 + data.acoef[2] * a2 * b2 + data.acoef[3] * a * b3 + data.acoef[4] * b2 * b2) % modulus
    bv = (4 * a3 * b + data.bcoef[2] * a2 * b2 + data.bcoef[3] * a * b3 + data.bcoef[4] * b2 * b2) % modulus
    return av, bv


def _residue_valuation(r, p, cap):
    if r == 0:
        return cap
    v = 0
    while v < cap and r % p == 0:
        r //= p
        v += 1
    return v


def canonical_height_doubling(
    curve: WeierstrassCurve,
    point: ECPoint,
    precision: int | None = None,
    max_steps: int = 20000,
):
    """Canonical height by iterating x(2P) = A(a,b)/B(a,b) on integer pairs.

    The growing pair is split into a floating unit-normalized part and exact
    residues at the finitely many primes that can divide gcd(A, B); the
    series tail is bounded by the curve's Bezout constants.
    """
    prec = precision or DEFAULT_PRECISION
    e_min, pt, _ = _to_minimal(curve, point)
    if pt.is_infinity or e_min.order_of_point(pt) is not None:
        with mp.workdps(working_dps(prec)):
            return mp.mpf(0)
    data = _height_data(e_min)

    with mp.workdps(working_dps(prec)):
        envelope = data.log_envelope() + mp.log(data.gcd_bound) + 1
        tol = mp.mpf(10) ** (-prec)
        steps = int(mp.ceil(mp.log(2 * envelope / (3 * tol)) / mp.log(4))) + 2
    if steps > max_steps:
        raise ResourceError(
            f"doubling route needs {steps} steps, over the budget of {max_steps}",
            partial_digits=int(max_steps * 0.602),
        )

    a0, b0 = pt.x.numerator, pt.x.denominator
    states = {}
    for p, cap in data.gcd_caps.items():
        k = (steps + 1) * cap + 8
        modulus = p**k
        states[p] = [a0 % modulus, b0 % modulus, modulus, cap]

    guard = int(1.3 * steps) + 30
    attempts = 0
    while True:
        attempts += 1
        with mp.workdps(working_dps(prec) + guard):
            floor_half = mp.mpf(data.patch_floor.numerator) / data.patch_floor.denominator / 2
            scale0 = max(abs(a0), b0)
            u = mp.mpf(a0) / scale0
            v = mp.mpf(b0) / scale0
            local = {p: list(st) for p, st in states.items()}
            acc = mp.log(mp.mpf(scale0))
            weight = mp.mpf(1) / 4
            ok = True
            for _ in range(steps):
                fa, fb = _eval_pair_float(data, u, v)
                m_step = max(abs(fa), abs(fb))
                if m_step < floor_half:
                    ok = False  # lost too much precision in the float pair
                    break
                g = 1
                exps = {}
                for p, st in local.items():
                    ra, rb = _eval_pair_mod(data, st[0], st[1], st[2])
                    e = min(
                        _residue_valuation(ra, p, st[3] + 1),
                        _residue_valuation(rb, p, st[3] + 1),
                    )
                    exps[p] = (e, ra, rb)
                    g *= p**e
                acc += weight * (mp.log(m_step) - mp.log(g))
                u, v = fa / m_step, fb / m_step
                for p, st in local.items():
                    e, ra, rb = exps[p]
                    pe = p**e
                    rest = g // pe
                    inv = pow(rest, -1, st[2])
                    st[0] = (ra // pe) * inv % st[2]
                    st[1] = (rb // pe) * inv % st[2]
                weight /= 4
            if ok:
                result = acc
                break
        guard *= 2
        if attempts > 3:
            raise ResourceError("doubling route failed to stabilize numerically")
    with mp.workdps(working_dps(prec)):
        return +result


# -- route two: exact finite local heights plus one real telescope -----------


def _mod_p(q: Fraction, p: int) -> int:
    return q.numerator * pow(q.denominator, -1, p) % p


def _vx(q: Fraction, p: int) -> int:
    # valuation of an x-coordinate, with x = 0 treated as integral
    if q == 0:
        return 0
    return padic_valuation(q, p)


def _torsion_local_coeff(curve, point, order, p):
    n = 2 * order + 1
    val = curve.psi_value(point, n)
    return Fraction(-2 * padic_valuation(val, p), n * n - 1)


def _finite_local_coeff(data, point, p, order):
    """lam_p(point) / log p as an exact Fraction; minimal model assumed."""
    curve = data.curve
    if order is not None:
        return _torsion_local_coeff(curve, point, order, p)
    v = _vx(point.x, p)
    if v < 0:
        return Fraction(-v)
    red = curve.reduction(p)
    if red.kind == "good":
        return Fraction(0)
    if (_mod_p(point.x, p), _mod_p(point.y, p)) != red.singular_point:
        return Fraction(0)  # smooth locus away from the origin
    # past the singular point: step to a multiple with smooth reduction and
    # pull back through lam(nP) = n^2 lam(P) - 2 log |psi_n(P)|_p
    cap = max(red.v_disc, 4) + 1
    for n in range(2, cap + 1):
        q = curve.mul(n, point)
        vq = _vx(q.x, p)
        if vq < 0:
            smooth_coeff = Fraction(-vq)
        elif (_mod_p(q.x, p), _mod_p(q.y, p)) != red.singular_point:
            smooth_coeff = Fraction(0)
        else:
            continue
        w = padic_valuation(curve.psi_value(point, n), p)
        return (smooth_coeff - 2 * w) / (n * n)
    raise HeightlabError(f"no multiple with smooth reduction at {p}")  # pragma: no cover


def _arch_local_value(data, point, order, prec):
    """Archimedean local height at working precision."""
    curve = data.curve
    if order is not None:
        n = 2 * order + 1
        val = curve.psi_value(point, n)
        return 2 * _log_fraction(abs(val)) / (n * n - 1)

    with mp.workdps(working_dps(prec)):
        envelope = data.log_envelope() / 3 + 1
        tol = mp.mpf(10) ** (-prec)
        steps = int(mp.ceil(mp.log(2 * envelope / tol) / mp.log(4))) + 2

    guard = int(1.3 * steps) + 30
    attempts = 0
    x0 = point.x
    while True:
        attempts += 1
        with mp.workdps(working_dps(prec) + guard):
            tiny = mp.mpf(10) ** (-(guard // 2))
            x = mp.mpf(x0.numerator) / x0.denominator
            acc = mp.mpf(0)
            weight = mp.mpf(1) / 4
            ok = True
            for _ in range(steps):
                s_val = peval_mpf(data.s_poly, x)
                if abs(s_val) < tiny:
                    ok = False
                    break
                n_val = peval_mpf(data.n_poly, x)
                acc += weight * mp.log(abs(s_val))
                x = n_val / s_val
                weight /= 4
            if ok:
                acc += weight * 4 * mp.log(max(abs(x), mp.mpf(1)))
                result = acc
                break
        guard *= 2
        if attempts > 3:
            raise ResourceError("archimedean telescope failed to stabilize")
    with mp.workdps(working_dps(prec)):
        return +result


def peval_mpf(f, x):
    acc = mp.mpf(0)
    for c in reversed(f):
        acc = acc * x + mp.mpf(c.numerator) / c.denominator
    return acc


class LocalHeight:
    """One local term: value as mpf, and the exact coefficient of log p
    when the place is finite (None at the archimedean place)."""

    __slots__ = ("place", "value", "log_coefficient")

    def __init__(self, place, value, log_coefficient=None):
        self.place = place
        self.value = value
        self.log_coefficient = log_coefficient

    def __repr__(self):
        tag = f" = ({self.log_coefficient})*log p" if self.log_coefficient is not None else ""
        return f"LocalHeight({self.place}, {mp.nstr(self.value, 12)}{tag})"


class HeightDecomposition:
    """All nonzero local heights of a point, on the minimal model."""

    __slots__ = ("curve", "minimal_curve", "point", "minimal_point", "locals", "total")

    def __init__(self, curve, minimal_curve, point, minimal_point, local_terms, total):
        self.curve = curve
        self.minimal_curve = minimal_curve
        self.point = point
        self.minimal_point = minimal_point
        self.locals = local_terms
        self.total = total

    def finite_support(self):
        return tuple(t.place.p for t in self.locals if t.place.is_finite)


def height_decomposition(
    curve: WeierstrassCurve, point: ECPoint, precision: int | None = None
) -> HeightDecomposition:
    """Exact-by-place decomposition whose terms sum to the canonical height.

    Rows cover the archimedean place and every finite place with a nonzero
    term; all omitted places contribute exactly zero.
    """
    prec = precision or DEFAULT_PRECISION
    e_min, pt, _ = _to_minimal(curve, point)
    if pt.is_infinity:
        raise PointError("the zero point has no local decomposition")
    data = _height_data(e_min)
    order = e_min.order_of_point(pt)

    candidates = set(data.bad_primes)
    if order is not None:
        n = 2 * order + 1
        candidates.update(factorize_rational(e_min.psi_value(pt, n)))
    else:
        candidates.update(factorize(pt.x.denominator))
    terms = []
    with mp.workdps(working_dps(prec)):
        total = mp.mpf(0)
        for p in sorted(candidates):
            coeff = _finite_local_coeff(data, pt, p, order)
            if coeff == 0:
                continue
            value = mp.mpf(coeff.numerator) / coeff.denominator * mp.log(p)
            terms.append(LocalHeight(Place.finite(p), value, coeff))
            total += value
        arch = _arch_local_value(data, pt, order, prec)
        terms.append(LocalHeight(Place.archimedean(), arch, None))
        total += arch
    return HeightDecomposition(curve, e_min, point, pt, tuple(terms), total)


def local_height(
    curve: WeierstrassCurve,
    point: ECPoint,
    place: Place,
    precision: int | None = None,
) -> LocalHeight:
    """A single local height in the zero-constant normalization."""
    prec = precision or DEFAULT_PRECISION
    e_min, pt, _ = _to_minimal(curve, point)
    if pt.is_infinity:
        raise PointError("the zero point has no local heights")
    data = _height_data(e_min)
    order = e_min.order_of_point(pt)
    with mp.workdps(working_dps(prec)):
        if place.is_finite:
            coeff = _finite_local_coeff(data, pt, place.p, order)
            value = mp.mpf(coeff.numerator) / coeff.denominator * mp.log(place.p)
            return LocalHeight(place, value, coeff)
        return LocalHeight(place, _arch_local_value(data, pt, order, prec), None)


def local_height_arch(
    curve: WeierstrassCurve, point: ECPoint, precision: int | None = None
) -> LocalHeight:
    """The local height at the real place."""
    return local_height(curve, point, Place.archimedean(), precision=precision)


def local_height_nonarch(
    curve: WeierstrassCurve, point: ECPoint, p: int, precision: int | None = None
) -> LocalHeight:
    """The local height at a finite prime, an exact rational times log p."""
    return local_height(curve, point, Place.finite(p), precision=precision)


def canonical_height_localsum(
    curve: WeierstrassCurve, point: ECPoint, precision: int | None = None
):
    """Canonical height as the sum of the local decomposition."""
    prec = precision or DEFAULT_PRECISION
    e_min, pt, _ = _to_minimal(curve, point)
    if pt.is_infinity or e_min.order_of_point(pt) is not None:
        with mp.workdps(working_dps(prec)):
            return mp.mpf(0)
    decomp = height_decomposition(curve, point, precision=prec)
    with mp.workdps(working_dps(prec)):
        return +decomp.total


def canonical_height(
    curve: WeierstrassCurve,
    point: ECPoint,
    precision: int | None = None,
    method: str = "localsum",
):
    """Canonical height; `method` picks the evaluation route."""
    if method == "localsum":
        return canonical_height_localsum(curve, point, precision)
    if method == "doubling":
        return canonical_height_doubling(curve, point, precision)
    raise HeightlabError(f"unknown height method: {method}")


def height_bilinear(
    curve: WeierstrassCurve,
    p: ECPoint,
    q: ECPoint,
    precision: int | None = None,
):
    """The symmetric form h(P+Q) - h(P) - h(Q) of the canonical height."""
    prec = precision or DEFAULT_PRECISION
    curve.require_point(p)
    curve.require_point(q)
    with mp.workdps(working_dps(prec)):
        s = canonical_height(curve, curve.add(p, q), prec)
        return +(s - canonical_height(curve, p, prec) - canonical_height(curve, q, prec))
