"""Gm-torsors over an elliptic curve and their fiberwise heights.

A rigidified bundle of degree d carries, at each place, the local height
(d/2) lam_v of the base point; a point of the associated torsor adds a
nonzero fiber coordinate t, and the torsor local height subtracts log|t|_v.
Summed over all contributing places the fiber terms cancel by the product
formula, so the global torsor height equals (d/2) h(base) no matter which
lift was chosen.  The cancellation is not assumed anywhere: the global
value is assembled place by place, and lift independence is a theorem the
tests can watch happening numerically.

Augmentations split a torsor point into lattice coordinates of the base
and the valuation class of the fiber, which is the shape the descent
machinery consumes.
"""

from __future__ import annotations

import mpmath as mp

from .arith import (
    DEFAULT_PRECISION,
    Place,
    ValuationVector,
    as_rational,
    place_log_norm,
    valuation_vector,
    working_dps,
)
from .curves import ECPoint, WeierstrassCurve
from .errors import InputError, PointError
from .heights import height_decomposition, local_height
from .lattice import Augmentation, MWBasis


class RigidifiedBundle:
    """Symmetric bundle of positive degree on a Weierstrass curve."""

    __slots__ = ("curve", "degree")

    def __init__(self, curve: WeierstrassCurve, degree: int = 2):
        if not isinstance(degree, int) or degree < 1:
            raise InputError("bundle degree must be a positive integer")
        self.curve = curve
        self.degree = degree

    def __eq__(self, other):
        return (
            isinstance(other, RigidifiedBundle)
            and self.curve == other.curve
            and self.degree == other.degree
        )

    def __repr__(self):
        return f"RigidifiedBundle({self.curve!r}, degree={self.degree})"


class TorsorPoint:
    """Affine base point with a nonzero fiber coordinate."""

    __slots__ = ("base", "fiber")

    def __init__(self, base: ECPoint, fiber):
        if base.is_infinity:
            raise PointError("torsor points must sit over an affine base")
        fiber = as_rational(fiber)
        if fiber == 0:
            raise InputError("fiber coordinate must be nonzero")
        self.base = base
        self.fiber = fiber

    def rescaled(self, c) -> "TorsorPoint":
        """The lift with fiber c*t over the same base."""
        return TorsorPoint(self.base, self.fiber * as_rational(c))

    def __eq__(self, other):
        return (
            isinstance(other, TorsorPoint)
            and self.base == other.base
            and self.fiber == other.fiber
        )

    def __repr__(self):
        return f"TorsorPoint({self.base!r}, fiber={self.fiber})"


class TorsorAugmentation:
    """Lattice coordinates of the base plus the fiber valuation class."""

    __slots__ = ("base_aug", "fiber_class")

    def __init__(self, base_aug: Augmentation, fiber_class: ValuationVector):
        self.base_aug = base_aug
        self.fiber_class = fiber_class

    def __eq__(self, other):
        return (
            isinstance(other, TorsorAugmentation)
            and self.base_aug == other.base_aug
            and self.fiber_class == other.fiber_class
        )

    def __repr__(self):
        return f"TorsorAugmentation({self.base_aug!r}, {self.fiber_class!r})"


def torsor_local_height(
    bundle: RigidifiedBundle,
    point: TorsorPoint,
    place: Place,
    precision: int | None = None,
):
    """(d/2) lam_v(base) - log|t|_v at one place."""
    prec = precision or DEFAULT_PRECISION
    base = bundle.curve.require_point(point.base)
    lam = local_height(bundle.curve, base, place, precision=prec).value
    with mp.workdps(working_dps(prec)):
        return (
            mp.mpf(bundle.degree) / 2 * lam
            - place_log_norm(point.fiber, place, precision=prec)
        )


def torsor_places(bundle: RigidifiedBundle, point: TorsorPoint, precision=None):
    """Places that can carry a nonzero term: base support, fiber support,
    and the archimedean place."""
    prec = precision or DEFAULT_PRECISION
    decomp = height_decomposition(bundle.curve, point.base, precision=prec)
    primes = set(decomp.finite_support())
    primes.update(valuation_vector(point.fiber).support())
    return [Place.finite(p) for p in sorted(primes)] + [Place.archimedean()]


def torsor_global_height(
    bundle: RigidifiedBundle, point: TorsorPoint, precision: int | None = None
):
    """Sum of the torsor local heights over all contributing places.

    Equals (d/2) h(base) because the fiber terms telescope away through
    the product formula; the sum is still taken literally.
    """
    prec = precision or DEFAULT_PRECISION
    bundle.curve.require_point(point.base)
    with mp.workdps(working_dps(prec)):
        total = mp.mpf(0)
        for place in torsor_places(bundle, point, precision=prec):
            total += torsor_local_height(bundle, point, place, precision=prec)
        return total


def tensor_points(
    bundle_a: RigidifiedBundle,
    point_a: TorsorPoint,
    bundle_b: RigidifiedBundle,
    point_b: TorsorPoint,
):
    """Tensor two torsor points over the same base: degrees add, fibers
    multiply."""
    if bundle_a.curve != bundle_b.curve:
        raise InputError("tensor factors must live on the same curve")
    if point_a.base != point_b.base:
        raise InputError("tensor factors must share the base point")
    bundle = RigidifiedBundle(bundle_a.curve, bundle_a.degree + bundle_b.degree)
    return bundle, TorsorPoint(point_a.base, point_a.fiber * point_b.fiber)


def augment_torsor_point(
    bundle: RigidifiedBundle, point: TorsorPoint, basis: MWBasis
) -> TorsorAugmentation:
    """Split a torsor point into base coordinates and fiber class."""
    if basis.curve != bundle.curve:
        raise InputError("basis and bundle must live on the same curve")
    return TorsorAugmentation(
        basis.decompose(point.base), valuation_vector(point.fiber)
    )


def fiber_act(aug: TorsorAugmentation, c: ValuationVector) -> TorsorAugmentation:
    """Translate the fiber class; the base coordinates do not move."""
    return TorsorAugmentation(aug.base_aug, aug.fiber_class + c)
