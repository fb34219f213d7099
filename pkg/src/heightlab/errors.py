"""Exception taxonomy shared across the package.

CLI exit codes map onto these: parse/IO -> 2, CurveError -> 3,
PointError -> 4, BasisError -> 5.  Everything else is a plain failure.
"""


class HeightlabError(Exception):
    pass


class DomainError(HeightlabError):
    """Operation applied outside its mathematical domain (e.g. valuation of 0)."""


class InputError(HeightlabError):
    """Malformed or inconsistent user input."""


class ParseError(InputError):
    """Unreadable serialized object (JSON, polynomial grammar, config)."""


class FactorizationIncomplete(HeightlabError):
    """Trial division exhausted its bound and the cofactor is not a certified prime."""

    def __init__(self, n, cofactor, bound):
        self.n = n
        self.cofactor = cofactor
        self.bound = bound
        super().__init__(
            f"factorization incomplete for {n}: cofactor {cofactor} "
            f"resists trial division up to {bound}"
        )


class CurveError(HeightlabError):
    """Invalid Weierstrass data (singular, wrong types)."""


class PointError(HeightlabError):
    """Point not on the curve, or an operation needs an affine point."""


class BasisError(HeightlabError):
    """Mordell-Weil basis rejected (dependent generators, decomposition failures)."""


class OutsideLatticeError(BasisError):
    """Exact verification of a decomposition failed at every admissible rounding."""


class MapError(HeightlabError):
    """Rational map trouble: indeterminate at a point, or model inconsistency."""


class DegreeEstimateError(HeightlabError):
    """Reduction-based degree estimates disagree across primes or with the declared degree."""


class InsufficientRangeError(HeightlabError):
    """A diagnostic needs more height spread than the supplied corpus has."""


class ResourceError(HeightlabError):
    """Configured bignum/iteration budget exceeded; carries partial precision."""

    def __init__(self, message, partial_digits=None):
        self.partial_digits = partial_digits
        super().__init__(message)
