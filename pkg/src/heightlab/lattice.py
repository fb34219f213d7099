"""Mordell-Weil lattices: bases, quadratic forms, exact decomposition.

A basis is a list of independent non-torsion points together with the Gram
matrix of the height pairing b(P, Q) = h(P+Q) - h(P) - h(Q).  Independence
is certified numerically by positivity of the leading principal minors,
which is a real certificate: the pairing is positive definite on the free
quotient, so dependent generators force a zero minor.

Decomposition of a point over a basis goes through a floating least-squares
solve, rounds to small denominators, and then verifies the answer exactly
with integer group-law arithmetic.  A wrong or unlucky rounding therefore
cannot escape: either the residual is torsion and the coordinates are
proven, or the point is rejected as outside the spanned lattice.

Enumeration of bounded-height vectors is Fincke-Pohst on the Gram matrix,
over (1/n)Z^r when a scaled lattice is requested, in lexicographic order.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import mpmath as mp

from .arith import DEFAULT_PRECISION, factorize, working_dps
from .curves import ECPoint, WeierstrassCurve
from .errors import BasisError, InputError, OutsideLatticeError
from .heights import canonical_height, height_bilinear

DEFAULT_DENOMINATOR_BOUND = 24


def _to_mpf(value):
    if isinstance(value, Fraction):
        return mp.mpf(value.numerator) / value.denominator
    return mp.mpf(value)


class Augmentation:
    """Rational coordinate vector of a point over a fixed basis."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        self.coords = tuple(Fraction(c) for c in coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __eq__(self, other):
        return isinstance(other, Augmentation) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return "Augmentation(%s)" % (", ".join(str(c) for c in self.coords),)

    @property
    def is_zero(self):
        return all(c == 0 for c in self.coords)


def in_scaled_lattice(aug: Augmentation, n: int) -> bool:
    """Whether every coordinate lies in (1/n)Z."""
    if n < 1:
        raise InputError("lattice scale must be a positive integer")
    return all((c * n).denominator == 1 for c in aug.coords)


def _minor_floor(prec):
    # below this, a leading minor is treated as vanishing (dependence)
    return mp.mpf(10) ** (-(prec // 2))


def _certify_gram(gram, prec):
    r = gram.rows
    for k in range(1, r + 1):
        sub = mp.matrix([[gram[i, j] for j in range(k)] for i in range(k)])
        if mp.det(sub) <= _minor_floor(prec):
            raise BasisError(
                "height pairing Gram matrix is not positive definite; "
                "generators are dependent or torsion up to precision"
            )


def _qf(gram, coords, prec):
    with mp.workdps(working_dps(prec)):
        total = mp.mpf(0)
        for i, a in enumerate(coords):
            for j, b in enumerate(coords):
                if a and b:
                    ab = a * b
                    total += mp.mpf(ab.numerator) / ab.denominator * gram[i, j]
        return total / 2


def _enumerate_gram(gram, r, bound_c, scale, prec):
    """Integer vectors m with m^T G m <= bound_c, returned as m/scale."""
    if r == 0:
        return [Augmentation(())] if bound_c >= 0 else []
    with mp.workdps(working_dps(prec)):
        try:
            low = mp.cholesky(gram)
        except ValueError as exc:
            raise InputError("Gram matrix is not positive definite") from exc
        # R = L^T; Q(m) = sum_i (sum_{j>=i} R[i][j] m[j])^2
        upper = [[low[j, i] for j in range(r)] for i in range(r)]
        slack = mp.mpf("1e-9") * (1 + abs(bound_c))
        found = []
        vec = [0] * r

        def descend(level, remaining):
            if level < 0:
                # final filter straight from the Gram form, so results agree
                # bit for bit with a brute-force scan of the same matrix
                q = mp.mpf(0)
                for i in range(r):
                    for j in range(r):
                        if vec[i] and vec[j]:
                            q += vec[i] * vec[j] * gram[i, j]
                if q <= bound_c:
                    found.append(Augmentation([Fraction(x, scale) for x in vec]))
                return
            shift = mp.mpf(0)
            for j in range(level + 1, r):
                shift += upper[level][j] * vec[j]
            radius = mp.sqrt(max(remaining + slack, mp.mpf(0)))
            diag = upper[level][level]
            lo = int(mp.ceil((-radius - shift) / diag))
            hi = int(mp.floor((radius - shift) / diag))
            for m_l in range(lo, hi + 1):
                vec[level] = m_l
                term = (diag * m_l + shift) ** 2
                descend(level - 1, remaining - term)
            vec[level] = 0

        descend(r - 1, mp.mpf(bound_c))
    found.sort(key=lambda a: a.coords)
    return found


class MWBasis:
    """Generators of (a finite-index sublattice of) E(Q)/torsion."""

    def __init__(
        self,
        curve: WeierstrassCurve,
        generators,
        precision: int | None = None,
        denominator_bound: int = DEFAULT_DENOMINATOR_BOUND,
    ):
        self.curve = curve
        self.generators = [curve.require_point(g) for g in generators]
        self.precision = precision or DEFAULT_PRECISION
        self.denominator_bound = denominator_bound
        for g in self.generators:
            if g.is_infinity or curve.order_of_point(g) is not None:
                raise BasisError("basis generators must be non-torsion")
        r = len(self.generators)
        with mp.workdps(working_dps(self.precision)):
            gram = mp.zeros(r, r)
            for i in range(r):
                for j in range(i, r):
                    val = height_bilinear(
                        curve,
                        self.generators[i],
                        self.generators[j],
                        precision=self.precision,
                    )
                    gram[i, j] = val
                    gram[j, i] = val
            self.gram = gram
            if r:
                _certify_gram(gram, self.precision)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def qf_height(self, aug: Augmentation):
        """(1/2) a^T G a; equals the canonical height of the combination."""
        if len(aug) != self.rank:
            raise InputError("augmentation length does not match basis rank")
        return _qf(self.gram, aug.coords, self.precision)

    def combine(self, aug: Augmentation) -> ECPoint:
        """The actual point sum c_i P_i for integral coordinates."""
        if not in_scaled_lattice(aug, 1):
            raise InputError("combine needs integer coordinates")
        total = ECPoint(None, None)
        for c, g in zip(aug.coords, self.generators):
            total = self.curve.add(total, self.curve.mul(int(c), g))
        return total

    def decompose(self, point: ECPoint) -> Augmentation:
        """Coordinates of a point over the basis, verified exactly.

        The floating solve only proposes; the group law disposes.  After
        rounding to denominators at most `denominator_bound`, the residual
        n P - sum (n c_i) P_i is computed exactly and must be torsion.
        """
        point = self.curve.require_point(point)
        r = self.rank
        if point.is_infinity or self.curve.order_of_point(point) is not None:
            return Augmentation([0] * r)
        if r == 0:
            raise OutsideLatticeError("non-torsion point over a rank-zero basis")
        with mp.workdps(working_dps(self.precision)):
            rhs = mp.matrix(
                [
                    height_bilinear(self.curve, point, g, precision=self.precision)
                    for g in self.generators
                ]
            )
            sol = mp.lu_solve(self.gram, rhs)
            coords = [
                Fraction(float(sol[i])).limit_denominator(self.denominator_bound)
                for i in range(r)
            ]
        scale = lcm(*(c.denominator for c in coords)) if r else 1
        resid = self.curve.mul(scale, point)
        for c, g in zip(coords, self.generators):
            resid = self.curve.sub(resid, self.curve.mul(int(c * scale), g))
        if self.curve.order_of_point(resid) is None:
            raise OutsideLatticeError(
                "point is not in the lattice spanned by the basis "
                "(denominators up to %d)" % self.denominator_bound
            )
        return Augmentation(coords)

    def enumerate_bounded(self, bound, n: int = 1):
        """All vectors a in (1/n)Z^r with qf_height(a) <= bound, lex order."""
        if n < 1 or n != int(n):
            raise InputError("lattice scale must be a positive integer")
        bound = _to_mpf(bound)
        if bound < 0:
            raise InputError("height bound must be nonnegative")
        # qf(m/n) <= B  <=>  m^T G m <= 2 B n^2
        return _enumerate_gram(
            self.gram, self.rank, 2 * bound * n * n, int(n), self.precision
        )

    def height_of_point(self, point: ECPoint):
        return canonical_height(self.curve, point, precision=self.precision)


class ProductMWBasis:
    """Block basis for a product of curves; cross-factor pairings vanish."""

    def __init__(self, bases):
        self.bases = list(bases)
        if not self.bases:
            raise InputError("product basis needs at least one factor")
        self.precision = max(b.precision for b in self.bases)
        r = self.rank
        with mp.workdps(working_dps(self.precision)):
            gram = mp.zeros(r, r)
            at = 0
            for b in self.bases:
                for i in range(b.rank):
                    for j in range(b.rank):
                        gram[at + i, at + j] = b.gram[i, j]
                at += b.rank
            self.gram = gram

    @property
    def rank(self) -> int:
        return sum(b.rank for b in self.bases)

    def qf_height(self, aug: Augmentation):
        if len(aug) != self.rank:
            raise InputError("augmentation length does not match basis rank")
        return _qf(self.gram, aug.coords, self.precision)

    def decompose(self, points) -> Augmentation:
        if len(points) != len(self.bases):
            raise InputError("need one point per product factor")
        coords = []
        for b, p in zip(self.bases, points):
            coords.extend(b.decompose(p).coords)
        return Augmentation(coords)

    def enumerate_bounded(self, bound, n: int = 1):
        if n < 1 or n != int(n):
            raise InputError("lattice scale must be a positive integer")
        bound = _to_mpf(bound)
        if bound < 0:
            raise InputError("height bound must be nonnegative")
        return _enumerate_gram(
            self.gram, self.rank, 2 * bound * n * n, int(n), self.precision
        )


def enumerate_quadratic_form(gram_rows, bound, n: int = 1, precision: int | None = None):
    """Fincke-Pohst on an explicit symmetric matrix, without a basis.

    Rows may hold ints, Fractions, or floats; the matrix must be exactly
    symmetric.  Returns vectors of (1/n)Z^r with (1/2) a^T G a <= bound in
    lexicographic order, like `MWBasis.enumerate_bounded`.
    """
    prec = precision or DEFAULT_PRECISION
    rows = [[Fraction(v) for v in row] for row in gram_rows]
    r = len(rows)
    for row in rows:
        if len(row) != r:
            raise InputError("Gram matrix must be square")
    for i in range(r):
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise InputError("Gram matrix must be symmetric")
    if n < 1 or n != int(n):
        raise InputError("lattice scale must be a positive integer")
    with mp.workdps(working_dps(prec)):
        bound = _to_mpf(bound)
        if bound < 0:
            raise InputError("height bound must be nonnegative")
        gram = mp.zeros(r, r) if r else mp.matrix([])
        for i in range(r):
            for j in range(r):
                v = rows[i][j]
                gram[i, j] = mp.mpf(v.numerator) / v.denominator
        return _enumerate_gram(gram, r, 2 * bound * n * n, int(n), prec)


def radical(c: int) -> int:
    prod = 1
    for p in factorize(c):
        prod *= p
    return prod


def kummer_exponent(c: int, torsion_order: int = 1) -> int:
    """Exponent bound 4 rad(c)^2 c^2 t for the image of Kummer descent.

    Odd c is replaced by 2c before the formula is applied; callers that
    care can test parity themselves, the substitution is always safe
    because the bound is monotone in c.
    """
    if c < 1 or torsion_order < 1:
        raise InputError("kummer_exponent needs positive integers")
    if c % 2:
        c = 2 * c
    return 4 * radical(c) ** 2 * c * c * torsion_order
