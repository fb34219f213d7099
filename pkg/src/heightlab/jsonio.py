"""JSON wire formats shared by the command-line front end.

Conventions, applied uniformly: rationals are "p/q" strings (integer
input is accepted and normalized), points are "inf" or {"x", "y"},
curves are objects with keys a1..a6, valuation vectors map prime
strings to exponent strings, and every floating value is rendered
once through `format_decimal` so identical inputs produce identical
bytes.
"""

import json
from fractions import Fraction

import mpmath as mp

from .arith import ValuationVector
from .curves import ECPoint, WeierstrassCurve
from .errors import ParseError

__all__ = [
    "format_decimal",
    "fraction_to_str",
    "fraction_from_obj",
    "point_to_json",
    "point_from_json",
    "plane_point_from_json",
    "plane_point_to_json",
    "curve_to_json",
    "curve_from_json",
    "valuation_vector_to_json",
    "valuation_vector_from_json",
    "augmentation_to_json",
    "matrix_to_json",
    "dumps",
    "load_json_argument",
]

DECIMAL_DIGITS = 30


def format_decimal(value, digits: int = DECIMAL_DIGITS) -> str:
    """Fixed-significance decimal rendering of a real value.

    An mpf passes through untouched so the digits it carries survive
    regardless of the ambient precision context.
    """
    if not isinstance(value, mp.mpf):
        with mp.workdps(digits + 10):
            if isinstance(value, Fraction):
                value = mp.mpf(value.numerator) / value.denominator
            else:
                value = mp.mpf(value)
    return mp.nstr(value, digits, strip_zeros=False)


def fraction_to_str(value) -> str:
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def fraction_from_obj(obj) -> Fraction:
    """Accept "p/q", "p", or a JSON integer."""
    if isinstance(obj, bool):
        raise ParseError(f"expected a rational, got {obj!r}")
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, str):
        try:
            return Fraction(obj.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {obj!r}") from exc
    raise ParseError(f"expected a rational, got {type(obj).__name__}")


def point_to_json(point: ECPoint):
    if point.is_infinity:
        return "inf"
    return {"x": fraction_to_str(point.x), "y": fraction_to_str(point.y)}


def point_from_json(obj) -> ECPoint:
    if obj == "inf":
        return ECPoint.infinity()
    if not isinstance(obj, dict) or set(obj) != {"x", "y"}:
        raise ParseError('a point is "inf" or an object with keys "x" and "y"')
    return ECPoint(fraction_from_obj(obj["x"]), fraction_from_obj(obj["y"]))


def plane_point_from_json(obj) -> tuple:
    """Affine plane point as an (x, y) pair of rationals."""
    if not isinstance(obj, dict) or set(obj) != {"x", "y"}:
        raise ParseError('a plane point is an object with keys "x" and "y"')
    return (fraction_from_obj(obj["x"]), fraction_from_obj(obj["y"]))


def plane_point_to_json(pair) -> dict:
    x, y = pair
    return {"x": fraction_to_str(x), "y": fraction_to_str(y)}


_AINV_KEYS = ("a1", "a2", "a3", "a4", "a6")


def curve_to_json(curve: WeierstrassCurve) -> dict:
    return {key: fraction_to_str(a) for key, a in zip(_AINV_KEYS, curve.ainvs)}


def curve_from_json(obj) -> WeierstrassCurve:
    if not isinstance(obj, dict) or set(obj) != set(_AINV_KEYS):
        raise ParseError("a curve is an object with keys a1, a2, a3, a4, a6")
    return WeierstrassCurve(*(fraction_from_obj(obj[key]) for key in _AINV_KEYS))


def valuation_vector_to_json(vv: ValuationVector) -> dict:
    return {str(p): fraction_to_str(e) for p, e in vv.items()}


def valuation_vector_from_json(obj) -> ValuationVector:
    if not isinstance(obj, dict):
        raise ParseError("a valuation vector is an object prime -> exponent")
    mapping = {}
    for key, raw in obj.items():
        try:
            p = int(key)
        except ValueError as exc:
            raise ParseError(f"not a prime key: {key!r}") from exc
        mapping[p] = fraction_from_obj(raw)
    return ValuationVector(mapping)


def augmentation_to_json(aug) -> list:
    return [fraction_to_str(c) for c in aug]


def matrix_to_json(rows, digits: int = DECIMAL_DIGITS) -> dict:
    """Decimal rendering plus the exact entries when they are rational.

    Accepts an mpmath matrix or a nested sequence of Fractions.
    """
    if isinstance(rows, mp.matrix):
        decimal = [
            [format_decimal(rows[i, j], digits) for j in range(rows.cols)]
            for i in range(rows.rows)
        ]
        return {"decimal": decimal, "exact": None}
    decimal = [[format_decimal(entry, digits) for entry in row] for row in rows]
    exact = [[fraction_to_str(entry) for entry in row] for row in rows]
    return {"decimal": decimal, "exact": exact}


def dumps(payload) -> str:
    """Canonical rendering: sorted keys, two-space indent, one newline."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_json_argument(text: str):
    """Inline JSON if the argument looks like JSON, else a file path."""
    candidate = text.strip()
    if candidate.startswith("{") or candidate.startswith("["):
        source, payload = "<inline>", candidate
    else:
        source = text
        try:
            with open(text, encoding="utf-8") as handle:
                payload = handle.read()
        except OSError as exc:
            raise ParseError(f"cannot read {text}: {exc}") from exc
    try:
        return json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{source}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
