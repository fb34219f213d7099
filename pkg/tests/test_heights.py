"""Canonical heights: both routes, the local terms, and the exact sum law."""

from fractions import Fraction

import mpmath as mp
import pytest

from heightlab import (
    DomainError,
    ECPoint,
    ModelMap,
    Place,
    PointError,
    ResourceError,
    canonical_height,
    canonical_height_doubling,
    canonical_height_localsum,
    height_bilinear,
    height_decomposition,
    local_height,
    naive_x_height,
)

mp.mp.dps = 65


def mpclose(a, b, eps="1e-45"):
    return mp.fabs(a - b) < mp.mpf(eps)


def pt(x, y):
    return ECPoint(Fraction(x), Fraction(y))


# value of the generator height on y^2 + y = x^3 - x, in the x-coordinate
# normalization (twice the size of the half-normalized convention)
H37_GEN = "0.0511114082399688"


class TestNaiveHeight:
    def test_values(self):
        assert mpclose(naive_x_height(pt(0, 0)), 0)
        assert mpclose(naive_x_height(pt(Fraction(1, 4), Fraction(-5, 8))), mp.log(4))
        assert mpclose(naive_x_height(pt(Fraction(21, 25), Fraction(-69, 125))), mp.log(25))

    def test_rejects_infinity(self):
        with pytest.raises(DomainError):
            naive_x_height(ECPoint(None, None))


class TestCanonicalAnchor:
    def test_generator_value_both_routes(self, e37):
        g = pt(0, 0)
        hd = canonical_height_doubling(e37, g)
        hl = canonical_height_localsum(e37, g)
        assert mp.fabs(hd - mp.mpf(H37_GEN)) < mp.mpf("1e-13")
        assert mpclose(hd, hl)

    def test_routes_agree_on_corpus(self, e37, e389, e5077, e_k2, e_aux):
        cases = [
            (e37, pt(0, 0)),
            (e37, pt(2, -3)),
            (e37, pt(Fraction(1, 4), Fraction(-5, 8))),
            (e389, pt(0, 0)),
            (e389, pt(1, 0)),
            (e5077, pt(-3, 0)),
            (e5077, pt(-2, 3)),
            (e_k2, pt(-1, 1)),
            (e_aux, pt(0, 1)),
        ]
        for e, p in cases:
            assert mpclose(
                canonical_height_doubling(e, p), canonical_height_localsum(e, p)
            ), f"routes disagree on {e} at {p}"

    def test_torsion_is_exactly_zero(self, e_tors, e11, e_z6):
        for e, p in [
            (e_tors, pt(1, 0)),
            (e_tors, pt(0, 0)),
            (e11, pt(5, 5)),
            (e11, pt(16, 60)),
            (e_z6, pt(2, 3)),
        ]:
            assert canonical_height(e, p) == 0
            assert canonical_height_doubling(e, p) == 0

    def test_zero_point(self, e37):
        assert canonical_height(e37, ECPoint(None, None)) == 0


class TestQuadraticity:
    def test_multiples(self, e37, e389, e5077):
        for e, gen in [
            (e37, pt(0, 0)),
            (e389, pt(0, 0)),
            (e389, pt(1, 0)),
            (e5077, pt(-2, 3)),
        ]:
            h1 = canonical_height(e, gen)
            for n in (2, 3, 5):
                hn = canonical_height(e, e.mul(n, gen))
                assert mpclose(hn, n * n * h1), f"n={n} on {e}"

    def test_negation_invariance(self, e389):
        g = pt(0, 0)
        assert mpclose(canonical_height(e389, g), canonical_height(e389, e389.neg(g)))


class TestDecomposition:
    def test_sum_matches_independent_route(self, e37, e389, e5077, e_k2):
        cases = [
            (e37, pt(0, 0)),
            (e37, pt(Fraction(1, 4), Fraction(-5, 8))),
            (e389, pt(0, 0)),
            (e389, pt(-1, 1)),
            (e5077, pt(-2, 3)),
            (e_k2, pt(-1, 1)),
        ]
        for e, p in cases:
            d = height_decomposition(e, p)
            assert mpclose(d.total, canonical_height_doubling(e, p)), f"{e} {p}"

    def test_generator_is_archimedean_only(self, e37):
        # x(P) = 0 is integral and P misses the node at 37, so every finite
        # term vanishes and the height is the archimedean term alone
        d = height_decomposition(e37, pt(0, 0))
        assert d.finite_support() == ()
        assert len(d.locals) == 1 and not d.locals[0].place.is_finite

    def test_denominator_prime_coefficient(self, e37):
        # x(5P) = 1/4 puts 5P two levels deep at 2, so lam_2 = 2 log 2
        d = height_decomposition(e37, pt(Fraction(1, 4), Fraction(-5, 8)))
        assert d.finite_support() == (2,)
        assert d.locals[0].log_coefficient == Fraction(2)

    def test_zero_point_rejected(self, e37):
        with pytest.raises(PointError):
            height_decomposition(e37, ECPoint(None, None))


class TestTwoTorsionOracle:
    """y^2 = x^3 - x: the 2-torsion heights are quarter-logs of psi_3 values,
    since 2P = O forces 8 lam(P) = 2 log |psi_3(P)|_v, and psi_3 takes the
    values -1, -4, -4 at x = 0, 1, -1."""

    def test_local_values(self, e_tors):
        two = Place.finite(2)
        inf = Place.archimedean()
        for x in (1, -1):
            t = pt(x, 0)
            assert local_height(e_tors, t, two).log_coefficient == Fraction(-1, 2)
            assert mpclose(local_height(e_tors, t, inf).value, mp.log(2) / 2, "1e-40")
        assert local_height(e_tors, pt(0, 0), two).log_coefficient == 0
        assert mpclose(local_height(e_tors, pt(0, 0), inf).value, 0, "1e-40")

    def test_decomposition_sums_to_zero(self, e_tors):
        for x in (1, -1):
            d = height_decomposition(e_tors, pt(x, 0))
            assert mpclose(d.total, 0)
            assert d.finite_support() == (2,)


class TestFiveTorsionSplitNode:
    """y^2 + y = x^3 - x^2 - 10x - 20 has a 5-gon at 11; the four affine
    5-torsion points sit on the four nonzero polygon components, giving
    lam_11 values -(4/5) log 11 twice and -(6/5) log 11 twice."""

    def test_multiset(self, e11):
        eleven = Place.finite(11)
        coeffs = sorted(
            local_height(e11, p, eleven).log_coefficient
            for p in (pt(5, 5), pt(5, -6), pt(16, 60), pt(16, -61))
        )
        assert coeffs == [
            Fraction(-6, 5),
            Fraction(-6, 5),
            Fraction(-4, 5),
            Fraction(-4, 5),
        ]

    def test_each_decomposition_cancels(self, e11):
        for p in (pt(5, 5), pt(16, 60)):
            d = height_decomposition(e11, p)
            assert mpclose(d.total, 0)


class TestModelIndependence:
    def test_scaled_model(self, e37):
        m = ModelMap(Fraction(1, 2), 1, 2, 3)
        e2 = e37.transformed(m)
        g = pt(0, 0)
        g2 = m.push(g)
        assert mpclose(canonical_height(e2, g2), canonical_height(e37, g), "1e-40")
        d = height_decomposition(e2, g2)
        assert d.minimal_curve == e37
        assert mpclose(d.total, canonical_height(e37, g), "1e-40")


class TestBilinear:
    def test_diagonal_and_symmetry(self, e389):
        p, q = pt(0, 0), pt(1, 0)
        assert mpclose(height_bilinear(e389, p, p), 2 * canonical_height(e389, p), "1e-40")
        assert mpclose(height_bilinear(e389, p, q), height_bilinear(e389, q, p), "1e-40")

    def test_parallelogram(self, e389, e5077):
        for e, p, q in [
            (e389, pt(0, 0), pt(1, 0)),
            (e5077, pt(-3, 0), pt(-2, 3)),
        ]:
            lhs = canonical_height(e, e.add(p, q)) + canonical_height(e, e.sub(p, q))
            rhs = 2 * canonical_height(e, p) + 2 * canonical_height(e, q)
            assert mpclose(lhs, rhs, "1e-40")

    def test_torsion_is_null(self, e_z6):
        # pairing against torsion vanishes even though local terms do not
        t = pt(2, 3)
        p = e_z6.add(t, t)  # still torsion
        assert mpclose(height_bilinear(e_z6, t, p), 0, "1e-40")


class TestResourceLimits:
    def test_step_budget(self, e37):
        with pytest.raises(ResourceError) as info:
            canonical_height_doubling(e37, pt(0, 0), precision=50, max_steps=5)
        assert info.value.partial_digits >= 0

    def test_precision_scales(self, e37):
        h20 = canonical_height(e37, pt(0, 0), precision=20)
        h50 = canonical_height(e37, pt(0, 0), precision=50)
        assert mp.fabs(h20 - h50) < mp.mpf("1e-19")
