"""Elliptic curves over Q: exact group law, models, torsion, reduction.

A curve is a long Weierstrass equation

    y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6

with rational coefficients and nonzero discriminant.  Points carry exact
Fraction coordinates; every operation here is exact.  Numerics enter only
as a root-locating aid inside the torsion search, and every candidate found
that way is verified with integer arithmetic before it is believed.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

from .arith import Rational, as_rational, is_prime, padic_valuation, rational_str
from .errors import CurveError, DomainError, InputError, PointError
from .polys import Poly, peval, pexactdiv, pmul, poly, pscale, psub

MAX_TORSION_ORDER = 12  # over Q no rational point has finite order above this


class ECPoint:
    """A rational point: either affine (x, y) or the point at infinity."""

    __slots__ = ("x", "y")

    def __init__(self, x=None, y=None):
        if (x is None) != (y is None):
            raise PointError("a point needs both coordinates or neither")
        self.x = None if x is None else as_rational(x)
        self.y = None if y is None else as_rational(y)

    @classmethod
    def infinity(cls) -> "ECPoint":
        return cls()

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __eq__(self, other):
        if not isinstance(other, ECPoint):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        if self.is_infinity:
            return "ECPoint(inf)"
        return f"ECPoint({self.x!r}, {self.y!r})"

    def __str__(self):
        if self.is_infinity:
            return "inf"
        return f"({rational_str(self.x)}, {rational_str(self.y)})"

    def sort_key(self):
        # infinity first, then affine points ordered by (x, y)
        if self.is_infinity:
            return (0, 0, 0)
        return (1, self.x, self.y)


INFINITY = ECPoint.infinity()


class ModelMap:
    """Change of Weierstrass model  x = u^2 x' + r,  y = u^3 y' + s u^2 x' + t.

    `push` carries points of the source curve to the primed model, `pull`
    goes back.  Composition chains two substitutions.
    """

    __slots__ = ("u", "r", "s", "t")

    def __init__(self, u, r=0, s=0, t=0):
        self.u = as_rational(u)
        self.r = as_rational(r)
        self.s = as_rational(s)
        self.t = as_rational(t)
        if self.u == 0:
            raise InputError("model scale u must be nonzero")

    def __repr__(self):
        return f"ModelMap(u={self.u}, r={self.r}, s={self.s}, t={self.t})"

    def is_identity(self) -> bool:
        return (self.u, self.r, self.s, self.t) == (1, 0, 0, 0)

    def push(self, point: ECPoint) -> ECPoint:
        if point.is_infinity:
            return INFINITY
        u, r, s, t = self.u, self.r, self.s, self.t
        xs = (point.x - r) / u**2
        ys = (point.y - s * (point.x - r) - t) / u**3
        return ECPoint(xs, ys)

    def pull(self, point: ECPoint) -> ECPoint:
        if point.is_infinity:
            return INFINITY
        u, r, s, t = self.u, self.r, self.s, self.t
        x = u**2 * point.x + r
        y = u**3 * point.y + s * u**2 * point.x + t
        return ECPoint(x, y)

    def then(self, other: "ModelMap") -> "ModelMap":
        """The composite substitution: first self, then `other`."""
        u1, r1, s1, t1 = self.u, self.r, self.s, self.t
        u2, r2, s2, t2 = other.u, other.r, other.s, other.t
        return ModelMap(
            u1 * u2,
            u1**2 * r2 + r1,
            u1 * s2 + s1,
            u1**3 * t2 + s1 * u1**2 * r2 + t1,
        )

    def inverse(self) -> "ModelMap":
        u, r, s, t = self.u, self.r, self.s, self.t
        return ModelMap(1 / u, -r / u**2, -s / u, (s * r - t) / u**3)


class WeierstrassCurve:
    """Long Weierstrass model with exact invariants and group law."""

    __slots__ = ("a1", "a2", "a3", "a4", "a6", "__dict__")

    def __init__(self, a1, a2, a3, a4, a6):
        self.a1 = as_rational(a1)
        self.a2 = as_rational(a2)
        self.a3 = as_rational(a3)
        self.a4 = as_rational(a4)
        self.a6 = as_rational(a6)
        if self.discriminant == 0:
            raise CurveError(f"singular model, discriminant is zero: {self.ainvs_str()}")

    @classmethod
    def from_ainvs(cls, ainvs) -> "WeierstrassCurve":
        vals = list(ainvs)
        if len(vals) == 2:
            a4, a6 = vals
            return cls(0, 0, 0, a4, a6)
        if len(vals) != 5:
            raise InputError("a curve takes [a1,a2,a3,a4,a6] or short form [a4,a6]")
        return cls(*vals)

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def ainvs_str(self) -> str:
        return "[" + ",".join(rational_str(a) for a in self.ainvs) + "]"

    def __eq__(self, other):
        if not isinstance(other, WeierstrassCurve):
            return NotImplemented
        return self.ainvs == other.ainvs

    def __hash__(self):
        return hash(self.ainvs)

    def __repr__(self):
        return f"WeierstrassCurve{self.ainvs_str()}"

    # -- invariants ---------------------------------------------------------

    @cached_property
    def b2(self) -> Rational:
        return self.a1**2 + 4 * self.a2

    @cached_property
    def b4(self) -> Rational:
        return 2 * self.a4 + self.a1 * self.a3

    @cached_property
    def b6(self) -> Rational:
        return self.a3**2 + 4 * self.a6

    @cached_property
    def b8(self) -> Rational:
        return (
            self.a1**2 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3**2
            - self.a4**2
        )

    @cached_property
    def c4(self) -> Rational:
        return self.b2**2 - 24 * self.b4

    @cached_property
    def c6(self) -> Rational:
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @cached_property
    def discriminant(self) -> Rational:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        disc = -b2**2 * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6
        # consistency of the stored formulas
        assert 4 * b8 == b2 * b6 - b4**2
        assert 1728 * disc == self.c4**3 - self.c6**2
        return disc

    @cached_property
    def j_invariant(self) -> Rational:
        return self.c4**3 / self.discriminant

    # -- membership and group law ------------------------------------------

    def equation_value(self, x, y) -> Rational:
        x, y = as_rational(x), as_rational(y)
        return (
            y**2
            + self.a1 * x * y
            + self.a3 * y
            - x**3
            - self.a2 * x**2
            - self.a4 * x
            - self.a6
        )

    def contains(self, point: ECPoint) -> bool:
        if point.is_infinity:
            return True
        return self.equation_value(point.x, point.y) == 0

    def point(self, x, y) -> ECPoint:
        pt = ECPoint(x, y)
        if not self.contains(pt):
            raise PointError(
                f"({rational_str(pt.x)}, {rational_str(pt.y)}) does not lie on {self.ainvs_str()}"
            )
        return pt

    def require_point(self, point: ECPoint) -> ECPoint:
        if not self.contains(point):
            raise PointError(f"{point} does not lie on {self.ainvs_str()}")
        return point

    def neg(self, point: ECPoint) -> ECPoint:
        if point.is_infinity:
            return INFINITY
        return ECPoint(point.x, -point.y - self.a1 * point.x - self.a3)

    def add(self, p: ECPoint, q: ECPoint) -> ECPoint:
        if p.is_infinity:
            return q
        if q.is_infinity:
            return p
        a1, a2, a3, a4 = self.a1, self.a2, self.a3, self.a4
        if p.x == q.x:
            if q.y == -p.y - a1 * p.x - a3:
                return INFINITY
            # tangent line at p (= q)
            denom = 2 * p.y + a1 * p.x + a3
            lam = (3 * p.x**2 + 2 * a2 * p.x + a4 - a1 * p.y) / denom
        else:
            lam = (q.y - p.y) / (q.x - p.x)
        nu = p.y - lam * p.x
        x3 = lam**2 + a1 * lam - a2 - p.x - q.x
        y3 = -(lam + a1) * x3 - nu - a3
        return ECPoint(x3, y3)

    def sub(self, p: ECPoint, q: ECPoint) -> ECPoint:
        return self.add(p, self.neg(q))

    def mul(self, n: int, point: ECPoint) -> ECPoint:
        if not isinstance(n, int):
            raise InputError("scalar multiple must be an integer")
        if n < 0:
            return self.mul(-n, self.neg(point))
        acc = INFINITY
        addend = point
        while n:
            if n & 1:
                acc = self.add(acc, addend)
            addend = self.add(addend, addend)
            n >>= 1
        return acc

    def order_of_point(self, point: ECPoint, cap: int = MAX_TORSION_ORDER):
        """Exact order if it is at most `cap`, else None (infinite order over Q)."""
        current = point
        for n in range(1, cap + 1):
            if current.is_infinity:
                return n
            current = self.add(current, point)
        return None

    # -- division polynomials ----------------------------------------------

    @cached_property
    def psi2_squared_poly(self) -> Poly:
        """S(x) = 4x^3 + b2 x^2 + 2 b4 x + b6, the square of the 2-division value."""
        return poly(self.b6, 2 * self.b4, self.b2, 4)

    def psi2_value(self, point: ECPoint) -> Rational:
        return 2 * point.y + self.a1 * point.x + self.a3

    def _psi_rep(self, n: int):
        """Division polynomial as (parity, f) with psi_n = f(x) * psi2^parity."""
        cache = self.__dict__.setdefault("_psi_cache", {})
        if n in cache:
            return cache[n]
        if not cache:
            b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
            cache[0] = (0, poly())
            cache[1] = (0, poly(1))
            cache[2] = (1, poly(1))
            cache[3] = (0, poly(b8, 3 * b6, 3 * b4, b2, 3))
            cache[4] = (
                1,
                poly(
                    b4 * b8 - b6**2,
                    b2 * b8 - b4 * b6,
                    10 * b8,
                    10 * b6,
                    5 * b4,
                    b2,
                    2,
                ),
            )
        if n < 0:
            raise InputError("division polynomial index must be nonnegative")
        S = self.psi2_squared_poly

        def rmul(a, b):
            par = a[0] + b[0]
            f = pmul(a[1], b[1])
            if par == 2:
                f = pmul(f, S)
                par = 0
            return (par, f)

        def rsub(a, b):
            if not b[1]:
                return a
            if not a[1]:
                return (b[0], pscale(b[1], -1))
            if a[0] != b[0]:
                raise DomainError("parity mismatch in division polynomial recurrence")
            return (a[0], psub(a[1], b[1]))

        for k in range(5, n + 1):
            m = k // 2
            pm2, pm1, pm = cache[m - 2], cache[m - 1], cache[m]
            pp1, pp2 = cache[m + 1], cache[m + 2]
            if k % 2:
                term1 = rmul(pp2, rmul(pm, rmul(pm, pm)))
                term2 = rmul(pm1, rmul(pp1, rmul(pp1, pp1)))
                cache[k] = rsub(term1, term2)
            else:
                first = rmul(pp2, rmul(pm1, pm1))
                second = rmul(pm2, rmul(pp1, pp1))
                numer = rmul(pm, rsub(first, second))
                if numer[0] == 0:
                    cache[k] = (1, pexactdiv(numer[1], S))
                else:
                    cache[k] = (0, numer[1])
        return cache[n]

    def psi_value(self, point: ECPoint, n: int) -> Rational:
        """The n-division polynomial evaluated at an affine point."""
        if point.is_infinity:
            raise PointError("division polynomials are evaluated at affine points")
        par, f = self._psi_rep(n)
        val = peval(f, point.x)
        if par:
            val *= self.psi2_value(point)
        return val

    # -- model changes ------------------------------------------------------

    def transformed(self, m: ModelMap) -> "WeierstrassCurve":
        u, r, s, t = m.u, m.r, m.s, m.t
        a1, a2, a3, a4, a6 = self.ainvs
        na1 = (a1 + 2 * s) / u
        na2 = (a2 - s * a1 + 3 * r - s**2) / u**2
        na3 = (a3 + r * a1 + 2 * t) / u**3
        na4 = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r**2 - 2 * s * t) / u**4
        na6 = (a6 + r * a4 + r**2 * a2 + r**3 - t * a3 - t**2 - r * t * a1) / u**6
        return WeierstrassCurve(na1, na2, na3, na4, na6)

    def map_between(self, other: "WeierstrassCurve", u) -> ModelMap:
        """The substitution carrying this model to `other`, given its scale u."""
        u = as_rational(u)
        s = (u * other.a1 - self.a1) / 2
        r = (u**2 * other.a2 - self.a2 + s * self.a1 + s**2) / 3
        t = (u**3 * other.a3 - self.a3 - r * self.a1) / 2
        m = ModelMap(u, r, s, t)
        if self.transformed(m) != other:
            raise CurveError("models are not related by a change of coordinates at this scale")
        return m

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.ainvs)

    def integral_model(self) -> tuple["WeierstrassCurve", ModelMap]:
        """Scale to integer coefficients; returns (curve, map to it)."""
        scale = lcm(*(a.denominator for a in self.ainvs))
        m = ModelMap(Fraction(1, scale))
        return self.transformed(m), m

    @cached_property
    def _minimal_pair(self) -> tuple["WeierstrassCurve", ModelMap]:
        e_int, m_int = self.integral_model()
        c4, c6 = int(e_int.c4), int(e_int.c6)
        scale = _best_minimal_scale(c4, c6)
        c4m, c6m = c4 // scale**4, c6 // scale**6
        e_min = _curve_from_c_invariants(c4m, c6m)
        m_fit = e_int.map_between(e_min, scale)
        return e_min, m_int.then(m_fit)

    def minimal_model(self) -> tuple["WeierstrassCurve", ModelMap]:
        """The reduced global minimal model and the substitution onto it."""
        return self._minimal_pair

    def is_minimal(self) -> bool:
        e_min, _ = self.minimal_model()
        return e_min == self

    # -- reduction ----------------------------------------------------------

    def reduction(self, p: int) -> "ReductionData":
        cache = self.__dict__.setdefault("_reduction_cache", {})
        if p not in cache:
            e_min, _ = self.minimal_model()
            cache[p] = _reduction_data(e_min, p)
        return cache[p]

    def bad_primes(self) -> tuple:
        """Primes of bad reduction of the minimal model, sorted."""
        e_min, _ = self.minimal_model()
        from .arith import factorize

        disc = int(e_min.discriminant)
        return tuple(p for p, _ in factorize(abs(disc)).items())

    # -- torsion -------------------------------------------------------------

    @cached_property
    def torsion_subgroup(self) -> "TorsionData":
        return _torsion_subgroup(self)


class ReductionData:
    """Reduction of the minimal model at one prime."""

    __slots__ = ("p", "v_disc", "v_c4", "kind", "split", "singular_point")

    def __init__(self, p, v_disc, v_c4, kind, split, singular_point):
        self.p = p
        self.v_disc = v_disc
        self.v_c4 = v_c4  # None means c4 = 0
        self.kind = kind  # "good" | "multiplicative" | "additive"
        self.split = split  # bool for multiplicative, else None
        self.singular_point = singular_point  # (x0, y0) mod p, or None

    @property
    def is_good(self) -> bool:
        return self.kind == "good"

    def __repr__(self):
        bits = f"p={self.p} vD={self.v_disc} kind={self.kind}"
        if self.kind == "multiplicative":
            bits += f" split={self.split}"
        return f"ReductionData({bits})"


class TorsionData:
    """The full rational torsion subgroup."""

    __slots__ = ("points", "structure", "generators")

    def __init__(self, points, structure, generators):
        self.points = points  # tuple, infinity first, affine sorted
        self.structure = structure  # "trivial" | "Z/n" | "Z/2 x Z/n"
        self.generators = generators  # tuple of ECPoint

    @property
    def order(self) -> int:
        return len(self.points)

    def __repr__(self):
        return f"TorsionData({self.structure}, order={self.order})"


# -- minimal model helpers ----------------------------------------------------


def _kraus_admissible(c4: int, c6: int) -> bool:
    # conditions at 3 and at 2 for (c4, c6) to come from an integral model
    if c6 % 9 == 0 and c6 % 27 != 0:
        return False
    if c6 % 4 == 3:
        return True
    return c4 % 16 == 0 and c6 % 32 in (0, 8)


def _best_minimal_scale(c4: int, c6: int) -> int:
    """Largest u with u^4 | c4, u^6 | c6 and an admissible quotient pair."""
    from .arith import factorize

    if c4 == 0:
        caps = {p: e // 6 for p, e in factorize(abs(c6)).items()}
    elif c6 == 0:
        caps = {p: e // 4 for p, e in factorize(abs(c4)).items()}
    else:
        g = gcd(abs(c4), abs(c6))
        caps = {}
        for p, _ in factorize(g).items():
            e4 = padic_valuation(Fraction(c4), p)
            e6 = padic_valuation(Fraction(c6), p)
            caps[p] = min(e4 // 4, e6 // 6)
    caps = {p: e for p, e in caps.items() if e > 0}
    odd_part = 1
    for p, e in caps.items():
        if p >= 5:
            odd_part *= p**e
    e2, e3 = caps.get(2, 0), caps.get(3, 0)
    candidates = sorted(
        ((2**i * 3**j, i, j) for i in range(e2 + 1) for j in range(e3 + 1)),
        reverse=True,
    )
    for val, _, _ in candidates:
        u = val * odd_part
        nc4, nc6 = c4 // u**4, c6 // u**6
        if (nc4**3 - nc6**2) % 1728 != 0:
            continue
        if _kraus_admissible(nc4, nc6):
            return u
    raise CurveError("no admissible minimal scale found")  # pragma: no cover


def _curve_from_c_invariants(c4: int, c6: int) -> WeierstrassCurve:
    """The reduced integral model with the given (admissible) c-invariants."""
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    num = b2**2 - c4
    if num % 24:
        raise CurveError("inadmissible invariants: b4 not integral")
    b4 = num // 24
    num = -(b2**3) + 36 * b2 * b4 - c6
    if num % 216:
        raise CurveError("inadmissible invariants: b6 not integral")
    b6 = num // 216
    a1 = b2 % 2
    if (b2 - a1) % 4:
        raise CurveError("inadmissible invariants: a2 not integral")
    a2 = (b2 - a1) // 4
    a3 = b6 % 2
    if (b4 - a1 * a3) % 2 or (b6 - a3) % 4:
        raise CurveError("inadmissible invariants: a4 or a6 not integral")
    a4 = (b4 - a1 * a3) // 2
    a6 = (b6 - a3) // 4
    curve = WeierstrassCurve(a1, a2, a3, a4, a6)
    if int(curve.c4) != c4 or int(curve.c6) != c6:
        raise CurveError("reconstructed model has wrong invariants")  # pragma: no cover
    return curve


# -- reduction helpers --------------------------------------------------------


def _poly_mod_p(f: Poly, p: int):
    """Fraction poly -> int coefficient list mod p (denominators must be units)."""
    out = []
    for c in f:
        den = c.denominator
        if den % p == 0:
            raise DomainError("coefficient with p in the denominator")
        out.append(c.numerator * pow(den, -1, p) % p)
    while out and out[-1] == 0:
        out.pop()
    return out


def _polymod_divmod(f, g, p):
    f = list(f)
    q = [0] * max(len(f) - len(g) + 1, 0)
    inv = pow(g[-1], -1, p)
    while len(f) >= len(g):
        while f and f[-1] % p == 0:
            f.pop()
        if len(f) < len(g):
            break
        c = f[-1] * inv % p
        k = len(f) - len(g)
        q[k] = c
        for j, b in enumerate(g):
            f[k + j] = (f[k + j] - c * b) % p
        f.pop()
    while f and f[-1] % p == 0:
        f.pop()
    return q, f


def _polymod_gcd(f, g, p):
    f = [c % p for c in f]
    g = [c % p for c in g]
    while g and any(g):
        _, r = _polymod_divmod(f, g, p)
        f, g = g, r
    while f and f[-1] % p == 0:
        f.pop()
    if f:
        inv = pow(f[-1], -1, p)
        f = [c * inv % p for c in f]
    return f


def _singular_point_mod_p(curve: WeierstrassCurve, p: int):
    """The unique singular point of the reduced curve, coordinates in [0, p)."""
    a1, a2, a3, a4, a6 = (int(a) for a in curve.ainvs)
    if p <= 3:
        for x0 in range(p):
            for y0 in range(p):
                eq = (y0**2 + a1 * x0 * y0 + a3 * y0 - x0**3 - a2 * x0**2 - a4 * x0 - a6) % p
                fx = (a1 * y0 - 3 * x0**2 - 2 * a2 * x0 - a4) % p
                fy = (2 * y0 + a1 * x0 + a3) % p
                if eq == 0 and fx == 0 and fy == 0:
                    return (x0, y0)
        raise CurveError(f"no singular point mod {p}")  # pragma: no cover
    s_mod = _poly_mod_p(curve.psi2_squared_poly, p)
    s_der = [(i * c) % p for i, c in enumerate(s_mod)][1:]
    g = _polymod_gcd(s_mod, s_der, p)
    if len(g) == 2:  # monic linear: x + g0
        x0 = (-g[0]) % p
    elif len(g) == 3:  # (x - x0)^2 from a triple root
        x0 = (-g[1] * pow(2, -1, p)) % p
    else:
        raise CurveError(f"no singular point mod {p}")
    y0 = (-(a1 * x0 + a3) * pow(2, -1, p)) % p
    return (x0, y0)


def _is_split_node(curve: WeierstrassCurve, p: int, x0: int, y0: int) -> bool:
    """Whether the node's two tangent directions are rational mod p."""
    a1 = int(curve.a1)
    a2 = int(curve.a2)
    if p == 2:
        # tangent cone Q(X, Y) = Y^2 + a1 X Y - (3 x0 + a2) X^2; split iff two
        # distinct projective zeros over F_2
        c = (3 * x0 + a2) % 2
        zeros = sum(
            1
            for (X, Y) in ((1, 0), (0, 1), (1, 1))
            if (Y * Y + a1 * X * Y - c * X * X) % 2 == 0
        )
        return zeros == 2
    d = (a1 * a1 + 4 * (3 * x0 + a2)) % p
    if d == 0:
        raise CurveError("cusp passed to the node splitting test")  # pragma: no cover
    return pow(d, (p - 1) // 2, p) == 1


def _reduction_data(e_min: WeierstrassCurve, p: int) -> ReductionData:
    if not is_prime(p):
        raise InputError(f"reduction requires a prime, got {p}")
    disc = e_min.discriminant
    v_disc = padic_valuation(disc, p)
    v_c4 = None if e_min.c4 == 0 else padic_valuation(e_min.c4, p)
    if v_disc == 0:
        return ReductionData(p, 0, v_c4, "good", None, None)
    sing = _singular_point_mod_p(e_min, p)
    if v_c4 == 0:
        split = _is_split_node(e_min, p, *sing)
        return ReductionData(p, v_disc, v_c4, "multiplicative", split, sing)
    return ReductionData(p, v_disc, v_c4, "additive", None, sing)


# -- torsion ------------------------------------------------------------------


def _integer_cubic_roots(a2c: int, a1c: int, a0c: int):
    """Integer roots of x^3 + a2c x^2 + a1c x + a0c, found numerically then verified."""
    import mpmath as mp

    size = max(abs(a2c), abs(a1c), abs(a0c), 1)
    with mp.workdps(len(str(size)) + 25):
        try:
            roots = mp.polyroots([1, a2c, a1c, a0c], maxsteps=200, extraprec=80)
        except mp.libmp.NoConvergence:  # pragma: no cover
            roots = []
        found = set()
        for rt in roots:
            if abs(mp.im(rt)) > mp.mpf("0.01"):
                continue
            base = int(mp.nint(mp.re(rt)))
            for x in (base - 1, base, base + 1):
                if x**3 + a2c * x**2 + a1c * x + a0c == 0:
                    found.add(x)
    return sorted(found)


def _square_divisors(n: int):
    """All d > 0 with d^2 | n, from the factorization of n."""
    from .arith import factorize

    half = [(p, e // 2) for p, e in factorize(abs(n)).items() if e >= 2]
    divs = [1]
    for p, e in half:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(set(divs))


def _torsion_subgroup(curve: WeierstrassCurve) -> TorsionData:
    # pass to an integral model y^2 = x^3 + A x + B, where torsion points have
    # integer coordinates with y = 0 or y^2 | disc
    e_int, m_int = curve.integral_model()
    b2 = e_int.b2
    m_short = ModelMap(Fraction(1, 6), -b2 / 12, -e_int.a1 / 2, e_int.a1 * b2 / 24 - e_int.a3 / 2)
    e_short = e_int.transformed(m_short)
    to_short = m_int.then(m_short)
    A, B = int(e_short.a4), int(e_short.a6)
    disc_short = int(e_short.discriminant)

    candidates = {0}
    candidates.update(_square_divisors(disc_short))
    seen = set()
    torsion = {INFINITY}
    for yc in sorted(candidates):
        for x in _integer_cubic_roots(0, A, B - yc * yc):
            for y in {yc, -yc}:
                if (x, y) in seen:
                    continue
                seen.add((x, y))
                pt_short = e_short.point(x, y)
                pt = to_short.pull(pt_short)
                if curve.order_of_point(pt) is not None:
                    torsion.add(pt)

    points = tuple(sorted(torsion, key=ECPoint.sort_key))
    n = len(points)
    orders = {pt: curve.order_of_point(pt) for pt in points}
    two_torsion = sum(1 for o in orders.values() if o == 2)
    max_order = max(orders.values())
    affine_sorted = [pt for pt in points if not pt.is_infinity]
    best = [pt for pt in affine_sorted if orders[pt] == max_order]
    if n == 1:
        structure, gens = "trivial", ()
    elif two_torsion <= 1:
        structure, gens = f"Z/{n}", (best[0],)
    else:
        structure = f"Z/2 x Z/{n // 2}"
        g1 = best[0]
        cyclic = set()
        current = INFINITY
        for _ in range(max_order):
            current = curve.add(current, g1)
            cyclic.add(current)
        extra = next(pt for pt in affine_sorted if orders[pt] == 2 and pt not in cyclic)
        gens = (g1, extra)
    if n not in (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16):
        raise CurveError(f"impossible rational torsion order {n}")
    return TorsionData(points, structure, gens)
