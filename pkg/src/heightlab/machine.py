"""Weil heights on plane curves through maps to elliptic curves.

A bundle is presented as a weighted system of maps f_i from a plane curve
into Weierstrass curves, with multiplicities w_i, target bundle degrees
d_i, and an overall denominator m; its height is

    h(a) = (1/m) sum_i w_i (d_i/2) hhat(f_i(a)).

Everything upstream of the canonical heights is exact: curve equations
and map components are parsed into rational coefficient tables, points
are substituted as fractions, and images are checked against the target
equation before any height is computed.

The diagnostics quantify how far such presentations behave like honest
bundle heights: additivity of tensor products up to a bounded spread, and
the degree ratio law h_{L0} = (deg L0/deg L) h_L + O(1 + h^(1/2)) with an
envelope constant that must not grow on the high part of the corpus.

Map degrees can be estimated independently of the declared value by
counting fibers of the reduced map over several small primes, and for
hyperelliptic-shaped sources with odd map components the pointwise sum of
two maps is computed symbolically, which is what turns degree counts into
off-diagonal entries of a degree pairing matrix.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from .arith import DEFAULT_PRECISION, as_rational, is_prime, working_dps
from .curves import ECPoint, WeierstrassCurve
from .errors import (
    DegreeEstimateError,
    InputError,
    MapError,
    ParseError,
    PointError,
)
from .heights import canonical_height

X_SYM, Y_SYM = sympy.symbols("x y")

_TRANSFORMS = standard_transformations + (convert_xor,)


def parse_polynomial(text: str):
    """Parse a rational expression in x and y; ^ means power."""
    try:
        expr = parse_expr(
            str(text),
            local_dict={"x": X_SYM, "y": Y_SYM},
            transformations=_TRANSFORMS,
        )
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise ParseError(f"cannot parse polynomial: {text!r}") from exc
    extra = expr.free_symbols - {X_SYM, Y_SYM}
    if extra:
        names = ", ".join(sorted(str(s) for s in extra))
        raise ParseError(f"unknown variables in {text!r}: {names}")
    return expr


def _poly_table(expr) -> dict:
    """Coefficient table {(i, j): Fraction} of a polynomial in x, y."""
    poly = sympy.Poly(sympy.expand(expr), X_SYM, Y_SYM)
    table = {}
    for (i, j), c in poly.terms():
        if not c.is_rational:
            raise ParseError(f"non-rational coefficient in {expr}")
        table[(i, j)] = Fraction(int(c.p), int(c.q))
    return table


def _table_eval(table: dict, x: Fraction, y: Fraction) -> Fraction:
    total = Fraction(0)
    for (i, j), c in table.items():
        total += c * x**i * y**j
    return total


def _table_eval_mod(table: dict, x: int, y: int, p: int):
    total = 0
    for (i, j), c in table.items():
        den = c.denominator % p
        if den == 0:
            raise InputError(f"prime {p} divides a coefficient denominator")
        cval = c.numerator * pow(den, -1, p)
        total += cval * pow(x, i, p) * pow(y, j, p)
    return total % p


def _as_fraction_pair(expr):
    """Split a rational expression into numerator and denominator tables."""
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    return _poly_table(num), _poly_table(den)


class PlaneCurve:
    """Affine plane curve F(x, y) = 0 with a remembered point list."""

    def __init__(self, equation, known_points=(), label: str = "X"):
        expr = parse_polynomial(equation) if isinstance(equation, str) else equation
        if not expr.is_polynomial(X_SYM, Y_SYM):
            raise ParseError(f"curve equation must be polynomial: {equation!r}")
        self.equation = sympy.expand(expr)
        self.table = _poly_table(self.equation)
        if not self.table:
            raise InputError("curve equation is identically zero")
        self.label = str(label)
        self.known_points = []
        for pt in known_points:
            x, y = as_rational(pt[0]), as_rational(pt[1])
            if _table_eval(self.table, x, y) != 0:
                raise PointError(
                    f"({x}, {y}) does not satisfy {self.label}: F = 0"
                )
            self.known_points.append((x, y))

    def contains(self, x, y) -> bool:
        return _table_eval(self.table, as_rational(x), as_rational(y)) == 0

    def points_mod(self, p: int):
        """All affine F_p-points of the reduced curve; p must be prime to
        every coefficient denominator."""
        sols = []
        for a in range(p):
            for b in range(p):
                if _table_eval_mod(self.table, a, b, p) == 0:
                    sols.append((a, b))
        return sols

    def __repr__(self):
        return f"PlaneCurve({self.label}: {self.equation} = 0)"


class RationalMap:
    """Map (x, y) -> (u, v) from a plane curve into a Weierstrass curve.

    Components are rational expressions; the map is validated on every
    known point of the source where both denominators are nonzero, so a
    model inconsistency cannot sit unnoticed behind a parse.
    """

    def __init__(self, source: PlaneCurve, u, v, target: WeierstrassCurve,
                 declared_degree: int, label: str = "f"):
        if not isinstance(declared_degree, int) or declared_degree < 1:
            raise InputError("declared_degree must be a positive integer")
        self.source = source
        self.target = target
        self.declared_degree = declared_degree
        self.label = str(label)
        u_expr = parse_polynomial(u) if isinstance(u, str) else u
        v_expr = parse_polynomial(v) if isinstance(v, str) else v
        self.u_expr, self.v_expr = u_expr, v_expr
        if u_expr.free_symbols == set() and v_expr.free_symbols == set():
            raise InputError("constant maps are not allowed")
        self.u_num, self.u_den = _as_fraction_pair(u_expr)
        self.v_num, self.v_den = _as_fraction_pair(v_expr)
        for x, y in source.known_points:
            image = self._try_eval(x, y)
            if image is None:
                continue
            try:
                target.require_point(image)
            except PointError as exc:
                raise MapError(
                    f"map {self.label} sends known point ({x}, {y}) off "
                    f"the target model"
                ) from exc

    def _try_eval(self, x: Fraction, y: Fraction):
        du = _table_eval(self.u_den, x, y)
        dv = _table_eval(self.v_den, x, y)
        if du == 0 or dv == 0:
            return None
        return ECPoint(
            _table_eval(self.u_num, x, y) / du,
            _table_eval(self.v_num, x, y) / dv,
        )

    def __call__(self, point) -> ECPoint:
        return eval_map(self, point)

    def __repr__(self):
        return (
            f"RationalMap({self.label}: ({self.u_expr}, {self.v_expr}) "
            f"-> {self.target.ainvs_str()})"
        )


def eval_map(rmap: RationalMap, point) -> ECPoint:
    """Exact image of a source point; indeterminacy and off-target images
    are both hard errors, not silent repairs."""
    x, y = as_rational(point[0]), as_rational(point[1])
    if not rmap.source.contains(x, y):
        raise PointError(
            f"({x}, {y}) is not on the source curve {rmap.source.label}"
        )
    image = rmap._try_eval(x, y)
    if image is None:
        raise MapError(f"map {rmap.label} is indeterminate at ({x}, {y})")
    try:
        rmap.target.require_point(image)
    except PointError as exc:
        raise MapError(
            f"image of ({x}, {y}) under {rmap.label} misses the target model"
        ) from exc
    return image


class BundleQuadruple:
    """Weighted system of maps presenting a bundle height.

    maps is a list of (RationalMap, weight, target_degree) with positive
    integer weights and degrees; m is the overall denominator.
    """

    def __init__(self, maps, m: int = 1):
        if not isinstance(m, int) or m < 1:
            raise InputError("quadruple denominator m must be a positive integer")
        if not maps:
            raise InputError("a bundle presentation needs at least one map")
        self.maps = []
        for rmap, weight, degree in maps:
            if not isinstance(weight, int) or weight < 1:
                raise InputError("map weights must be positive integers")
            if not isinstance(degree, int) or degree < 1:
                raise InputError("target bundle degrees must be positive integers")
            self.maps.append((rmap, weight, degree))
        self.m = m

    @property
    def bundle_degree(self) -> Fraction:
        """deg L = (1/m) sum w_i d_i deg(f_i), from the declared degrees."""
        total = sum(w * d * f.declared_degree for f, w, d in self.maps)
        return Fraction(total, self.m)

    def tensor_power(self, k: int) -> "BundleQuadruple":
        if not isinstance(k, int) or k < 1:
            raise InputError("tensor power must be a positive integer")
        return BundleQuadruple([(f, w * k, d) for f, w, d in self.maps], self.m)


def weil_height(quad: BundleQuadruple, point, precision: int | None = None):
    """(1/m) sum w_i (d_i/2) hhat(f_i(point))."""
    prec = precision or DEFAULT_PRECISION
    with mp.workdps(working_dps(prec)):
        total = mp.mpf(0)
        for rmap, weight, degree in quad.maps:
            image = eval_map(rmap, point)
            h = canonical_height(rmap.target, image, precision=prec)
            total += mp.mpf(weight * degree) / 2 * h
        return total / quad.m


class DiagnosticReport:
    """Outcome of a height-identity check over a corpus."""

    __slots__ = ("kind", "samples", "spread", "fitted_constants", "passed")

    def __init__(self, kind, samples, spread, fitted_constants, passed):
        self.kind = kind
        self.samples = tuple(samples)
        self.spread = spread
        self.fitted_constants = fitted_constants
        self.passed = bool(passed)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __repr__(self):
        return (
            f"DiagnosticReport({self.kind}, {len(self.samples)} samples, "
            f"spread={self.spread}, verdict={self.verdict})"
        )


def additivity_diagnostic(
    quad_a: BundleQuadruple,
    quad_b: BundleQuadruple,
    quad_ab: BundleQuadruple,
    corpus,
    envelope: float = 5.0,
    precision: int | None = None,
) -> DiagnosticReport:
    """Spread of h_{ab} - h_a - h_b over the corpus against a fixed envelope."""
    if not corpus:
        raise InputError("additivity diagnostic needs a nonempty corpus")
    prec = precision or DEFAULT_PRECISION
    samples = []
    with mp.workdps(working_dps(prec)):
        diffs = []
        for pt in corpus:
            ha = weil_height(quad_a, pt, precision=prec)
            hb = weil_height(quad_b, pt, precision=prec)
            hab = weil_height(quad_ab, pt, precision=prec)
            diff = hab - ha - hb
            diffs.append(diff)
            samples.append(
                {"point": tuple(pt), "h_a": ha, "h_b": hb, "h_ab": hab,
                 "defect": diff}
            )
        spread = max(diffs) - min(diffs)
        worst = max(abs(d) for d in diffs)
        passed = spread <= mp.mpf(envelope)
    return DiagnosticReport("additivity", samples, spread, (worst, mp.mpf(0)), passed)


def _envelope_constant(residuals, heights):
    # minimal C with |r| <= C (1 + sqrt(h)) over the sample
    best = mp.mpf(0)
    for r, h in zip(residuals, heights):
        c = abs(r) / (1 + mp.sqrt(max(h, mp.mpf(0))))
        best = max(best, c)
    return best


def degree_ratio_diagnostic(
    quad_num: BundleQuadruple,
    quad_den: BundleQuadruple,
    corpus,
    precision: int | None = None,
) -> DiagnosticReport:
    """Residuals of h_{L0} = (deg L0/deg L) h_L against a sqrt envelope.

    The envelope constant is fitted separately on the lower and upper
    height halves; the identity is accepted when the upper fit does not
    exceed the lower one, which is the numerical shadow of the O(1 + h^(1/2))
    error law.
    """
    if len(corpus) < 6:
        raise InputError("degree ratio diagnostic needs at least 6 points")
    deg_num = quad_num.bundle_degree
    deg_den = quad_den.bundle_degree
    if deg_den <= 0:
        raise InputError("denominator bundle has nonpositive degree")
    ratio = Fraction(deg_num, deg_den)
    prec = precision or DEFAULT_PRECISION
    with mp.workdps(working_dps(prec)):
        ratio_f = mp.mpf(ratio.numerator) / ratio.denominator
        rows = []
        for pt in corpus:
            h0 = weil_height(quad_num, pt, precision=prec)
            h1 = weil_height(quad_den, pt, precision=prec)
            rows.append((h1, h0 - ratio_f * h1, tuple(pt)))
        rows.sort(key=lambda t: t[0])
        half = len(rows) // 2
        lower, upper = rows[:half], rows[half:]
        c_lower = _envelope_constant([r for _, r, _ in lower], [h for h, _, _ in lower])
        c_upper = _envelope_constant([r for _, r, _ in upper], [h for h, _, _ in upper])
        slack = mp.mpf(10) ** (-(prec // 2))
        passed = c_upper <= c_lower + slack
        spread = max(r for _, r, _ in rows) - min(r for _, r, _ in rows)
        samples = [
            {"point": pt, "h_den": h, "residual": r} for h, r, pt in rows
        ]
    return DiagnosticReport(
        "degree_ratio", samples, spread, (c_lower, c_upper), passed
    )


class DegreeEstimate:
    __slots__ = ("value", "primes", "tag")

    def __init__(self, value, primes, tag):
        self.value = value
        self.primes = tuple(primes)
        self.tag = tag

    def __repr__(self):
        return f"DegreeEstimate({self.value}, primes={self.primes}, {self.tag})"


def estimate_map_degree(rmap: RationalMap, primes) -> DegreeEstimate:
    """Estimate deg(f) as the maximal finite-fiber size of the reduced map.

    Sampled over at least three good primes; all samples must agree with
    one another and with the declared degree, otherwise the estimate is
    rejected rather than averaged.
    """
    primes = list(primes)
    if len(primes) < 3:
        raise InputError("degree estimation needs at least 3 primes")
    per_prime = {}
    for p in primes:
        if not is_prime(p):
            raise InputError(f"not a prime: {p}")
        fibers = {}
        for a, b in rmap.source.points_mod(p):
            du = _table_eval_mod(rmap.u_den, a, b, p)
            dv = _table_eval_mod(rmap.v_den, a, b, p)
            if du == 0 or dv == 0:
                continue
            image = (
                _table_eval_mod(rmap.u_num, a, b, p) * pow(du, -1, p) % p,
                _table_eval_mod(rmap.v_num, a, b, p) * pow(dv, -1, p) % p,
            )
            fibers[image] = fibers.get(image, 0) + 1
        if not fibers:
            raise InputError(f"no usable points mod {p}")
        per_prime[p] = max(fibers.values())
    values = set(per_prime.values())
    if len(values) != 1:
        raise DegreeEstimateError(f"degree estimate unstable: {per_prime}")
    value = values.pop()
    if value != rmap.declared_degree:
        raise DegreeEstimateError(
            f"declared degree {rmap.declared_degree} but fibers mod "
            f"{primes} have size {value}"
        )
    return DegreeEstimate(value, primes, "consistent")


# -- symbolic sums of odd maps on hyperelliptic-shaped sources ---------------


def _hyperelliptic_rhs(source: PlaneCurve):
    """For F = c y^2 - g(x), return g/c as a sympy expression in x."""
    gx = sympy.S(0)
    y2 = None
    for (i, j), c in source.table.items():
        cs = sympy.Rational(c.numerator, c.denominator)
        if j == 0:
            gx -= cs * X_SYM**i
        elif j == 2 and i == 0:
            y2 = cs
        else:
            raise MapError(
                "symbolic sums need a source of the shape c y^2 = g(x)"
            )
    if y2 is None:
        raise MapError("source equation has no y^2 term")
    return sympy.cancel(gx / y2)


def _odd_parts(rmap: RationalMap):
    """Require u in Q(x) and v = y r(x); return (u, r) as x-expressions."""
    u = sympy.cancel(sympy.together(rmap.u_expr))
    if Y_SYM in u.free_symbols:
        raise MapError(f"map {rmap.label}: u-component must not involve y")
    ratio = sympy.cancel(sympy.together(rmap.v_expr / Y_SYM))
    if Y_SYM in ratio.free_symbols:
        # v may still simplify through y^2 = g(x); substitute and retry
        g = _hyperelliptic_rhs(rmap.source)
        num, den = sympy.fraction(ratio)
        num = sympy.expand(num)
        reduced = num.subs(Y_SYM**2, g)
        ratio = sympy.cancel(reduced / den)
        if Y_SYM in ratio.free_symbols:
            raise MapError(f"map {rmap.label}: v-component must be y times Q(x)")
    return u, ratio


def map_negated(rmap: RationalMap) -> RationalMap:
    """The pointwise negative -f; target must have a1 = a3 = 0."""
    if rmap.target.a1 != 0 or rmap.target.a3 != 0:
        raise MapError("negation formula needs a1 = a3 = 0 on the target")
    return RationalMap(
        rmap.source,
        rmap.u_expr,
        sympy.expand(-rmap.v_expr),
        rmap.target,
        rmap.declared_degree,
        label=f"-{rmap.label}",
    )


def map_sum(map_a: RationalMap, map_b: RationalMap) -> RationalMap:
    """The pointwise sum f + g of two odd maps into one elliptic curve.

    Source must have the shape c y^2 = g(x), the shared target must have
    a1 = a3 = 0, and both maps must be odd (u pure in x, v in y Q(x)).
    Then every coordinate of the sum lands back in that shape, the slope
    squares down to Q(x) through y^2 = g(x), and the degree of the sum can
    be read off the x-component.  The declared degree of the result is
    exactly that reading.
    """
    if map_a.source is not map_b.source and map_a.source.table != map_b.source.table:
        raise MapError("summands must share the source curve")
    if map_a.target != map_b.target:
        raise MapError("summands must share the target curve")
    target = map_a.target
    if target.a1 != 0 or target.a3 != 0:
        raise MapError("sum formula needs a1 = a3 = 0 on the target")
    g = _hyperelliptic_rhs(map_a.source)
    u1, r1 = _odd_parts(map_a)
    u2, r2 = _odd_parts(map_b)
    if sympy.cancel(u1 - u2) == 0:
        raise MapError(
            "summands share the x-component; the chord slope degenerates"
        )
    a2c = target.a2
    a2s = sympy.Rational(a2c.numerator, a2c.denominator)
    # lambda = y (r2 - r1)/(u2 - u1); lambda^2 = g (r2 - r1)^2/(u2 - u1)^2
    rho = sympy.cancel((r2 - r1) / (u2 - u1))
    lam2 = sympy.cancel(g * rho**2)
    u3 = sympy.cancel(lam2 - a2s - u1 - u2)
    r3 = sympy.cancel(rho * (u1 - u3) - r1)
    num, den = sympy.fraction(sympy.cancel(sympy.together(u3)))
    degree = max(
        sympy.Poly(num, X_SYM).degree(), sympy.Poly(den, X_SYM).degree()
    )
    if degree < 1:
        raise MapError("pointwise sum is a constant map")
    return RationalMap(
        map_a.source,
        u3,
        sympy.expand(Y_SYM * r3),
        target,
        int(degree),
        label=f"{map_a.label}+{map_b.label}",
    )
