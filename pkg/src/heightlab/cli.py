"""Command-line front end.

One binary, seven subcommands: curve, height, decompose, torsor,
enumerate, diag, md.  Inputs are JSON, given inline or as file paths.
Output is deterministic for a fixed configuration: decimals render at a
fixed significance, lists keep contractual orders, and JSON is emitted
with sorted keys.  The seed in effect is echoed on stderr so runs can
be reproduced; stdout carries only the result.

Exit codes: 0 ok, 2 I/O or parse, 3 invalid curve, 4 off-curve point,
5 invalid basis.  For the md command a failed criterion is data, not an
error.
"""

import argparse
import os
import sys
from fractions import Fraction

import mpmath as mp

from .arith import Place, factorize, working_dps
from .config import build_config
from .curves import ECPoint
from .demjanenko import degree_pairing_from_maps, md_report
from .errors import (
    BasisError,
    CurveError,
    DomainError,
    HeightlabError,
    InputError,
    ParseError,
    PointError,
)
from .heights import (
    canonical_height_doubling,
    canonical_height_localsum,
    height_decomposition,
    local_height,
)
from .jsonio import (
    DECIMAL_DIGITS,
    augmentation_to_json,
    curve_from_json,
    curve_to_json,
    dumps,
    format_decimal,
    fraction_from_obj,
    fraction_to_str,
    load_json_argument,
    matrix_to_json,
    plane_point_from_json,
    point_from_json,
    point_to_json,
    valuation_vector_to_json,
)
from .lattice import Augmentation, MWBasis, ProductMWBasis
from .machine import (
    BundleQuadruple,
    PlaneCurve,
    RationalMap,
    additivity_diagnostic,
    degree_ratio_diagnostic,
)
from .torsor import (
    RigidifiedBundle,
    TorsorPoint,
    augment_torsor_point,
    torsor_global_height,
    torsor_local_height,
    torsor_places,
)

__all__ = ["main"]


# -- shared serialization helpers ---------------------------------------------


def _place_label(place: Place) -> str:
    return str(place.p) if place.is_finite else "inf"


def _json_value(value, digits):
    """Best-effort canonical rendering for diagnostic sample entries."""
    if isinstance(value, Fraction):
        return fraction_to_str(value)
    if isinstance(value, Augmentation):
        return augmentation_to_json(value)
    if isinstance(value, ECPoint):
        return point_to_json(value)
    if isinstance(value, mp.mpf):
        return format_decimal(value, digits)
    if isinstance(value, (tuple, list)):
        return [_json_value(v, digits) for v in value]
    if isinstance(value, dict):
        return {k: _json_value(v, digits) for k, v in value.items()}
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    return format_decimal(value, digits)


def _diagnostic_to_json(report, digits):
    return {
        "kind": report.kind,
        "verdict": report.verdict,
        "spread": format_decimal(report.spread, digits),
        "fitted_constants": [format_decimal(c, digits) for c in report.fitted_constants],
        "samples": [_json_value(s, digits) for s in report.samples],
    }


# -- JSON input builders ------------------------------------------------------


def _bases_from_json(obj, config):
    if not isinstance(obj, dict) or set(obj) != {"curves", "generators"}:
        raise ParseError('a basis is an object with keys "curves" and "generators"')
    curve_objs = obj["curves"]
    gen_lists = obj["generators"]
    if not isinstance(curve_objs, list) or not isinstance(gen_lists, list):
        raise ParseError("basis curves and generators must be arrays")
    if len(curve_objs) != len(gen_lists):
        raise ParseError("need one generator list per basis curve")
    if not curve_objs:
        raise ParseError("a basis needs at least one curve")
    bases = []
    for curve_obj, gens in zip(curve_objs, gen_lists):
        curve = curve_from_json(curve_obj)
        points = [point_from_json(p) for p in gens]
        bases.append(
            MWBasis(
                curve,
                points,
                precision=config.precision,
                denominator_bound=config.denominator_bound,
            )
        )
    return bases


def _system_from_json(obj, config):
    """Plane curve, corpus, maps, and bundle data from a system object."""
    if not isinstance(obj, dict):
        raise ParseError("a curve system is a JSON object")
    for key in ("curve", "points", "maps"):
        if key not in obj:
            raise ParseError(f"curve system is missing {key!r}")
    curve_obj = obj["curve"]
    if not isinstance(curve_obj, dict) or "F" not in curve_obj:
        raise ParseError('the system curve is an object {"F": polynomial-string}')
    corpus = [plane_point_from_json(p) for p in obj["points"]]
    source = PlaneCurve(curve_obj["F"], corpus, label=obj.get("label", "X"))
    maps = []
    for k, map_obj in enumerate(obj["maps"]):
        if not isinstance(map_obj, dict) or not {"u", "v", "target", "degree"} <= set(map_obj):
            raise ParseError('a map is an object with keys "u", "v", "target", "degree"')
        target = curve_from_json(map_obj["target"])
        label = map_obj.get("label", f"f{k + 1}")
        maps.append(
            RationalMap(
                source, map_obj["u"], map_obj["v"], target,
                map_obj["degree"], label=label,
            )
        )
    weights = obj.get("weights")
    if weights is None:
        weights = [[1, 2]] * len(maps)
    if len(weights) != len(maps):
        raise ParseError("need one [weight, degree] pair per map")
    quad = BundleQuadruple(
        [(m, w, d) for m, (w, d) in zip(maps, weights)], obj.get("m", 1)
    )
    return source, corpus, maps, quad


# -- subcommands --------------------------------------------------------------


def cmd_curve(args, config):
    curve = curve_from_json(load_json_argument(args.input))
    minimal, _ = curve.minimal_model()
    torsion = minimal.torsion_subgroup
    disc = minimal.discriminant
    bad_primes = sorted(factorize_rational_support(disc, config.factor_bound))
    reduction = []
    for p in bad_primes:
        red = minimal.reduction(p)
        reduction.append(
            {
                "p": str(p),
                "kind": red.kind,
                "v_disc": red.v_disc,
                "split": red.split,
            }
        )
    return {
        "curve": curve_to_json(curve),
        "minimal_model": curve_to_json(minimal),
        "discriminant": fraction_to_str(disc),
        "c4": fraction_to_str(minimal.c4),
        "c6": fraction_to_str(minimal.c6),
        "j_invariant": fraction_to_str(minimal.j_invariant),
        "torsion": {
            "structure": torsion.structure,
            "order": torsion.order,
            "points": [point_to_json(q) for q in torsion.points],
        },
        "reduction": reduction,
    }


def factorize_rational_support(q: Fraction, bound: int):
    support = set(factorize(abs(q.numerator), bound))
    support.update(factorize(q.denominator, bound))
    return support


def cmd_height(args, config):
    curve = curve_from_json(load_json_argument(args.curve))
    point = point_from_json(load_json_argument(args.point))
    curve.require_point(point)
    prec = config.precision
    digits = DECIMAL_DIGITS
    h_sum = canonical_height_localsum(curve, point, prec)
    h_doub = canonical_height_doubling(curve, point, prec)
    with mp.workdps(working_dps(prec)):
        agreement = abs(h_sum - h_doub)
    payload = {
        "hhat": format_decimal(h_sum, digits),
        "method_agreement": format_decimal(agreement, digits),
        "local": None,
    }
    if args.local:
        is_torsion = point.is_infinity or curve.order_of_point(point) is not None
        if is_torsion:
            payload["local"] = []
            payload["local_note"] = "torsion point: every local table entry sums away"
            payload["local_sum_difference"] = format_decimal(h_sum, digits)
        else:
            decomp = height_decomposition(curve, point, precision=prec)
            payload["local"] = [
                {
                    "place": _place_label(term.place),
                    "value": format_decimal(term.value, digits),
                    "exact_part": (
                        fraction_to_str(term.log_coefficient)
                        if term.log_coefficient is not None
                        else None
                    ),
                }
                for term in decomp.locals
            ]
            with mp.workdps(working_dps(prec)):
                diff = abs(decomp.total - h_doub)
            payload["local_sum_difference"] = format_decimal(diff, digits)
            payload["local_sum_within_1e-8"] = bool(diff <= mp.mpf("1e-8"))
        if args.figures and payload["local"]:
            from . import plots

            os.makedirs(args.figures, exist_ok=True)
            payload["figures"] = [
                plots.plot_local_decomposition(payload["local"], args.figures)
            ]
    return payload


def cmd_decompose(args, config):
    bases = _bases_from_json(load_json_argument(args.basis), config)
    point_obj = load_json_argument(args.point)
    if len(bases) == 1:
        aug = bases[0].decompose(point_from_json(point_obj))
    else:
        if not isinstance(point_obj, list) or len(point_obj) != len(bases):
            raise ParseError("a product basis needs one point per factor")
        aug = ProductMWBasis(bases).decompose(
            [point_from_json(p) for p in point_obj]
        )
    return {
        "coordinates": augmentation_to_json(aug),
        "denominator_bound": config.denominator_bound,
        "verified": True,
    }


def cmd_torsor(args, config):
    obj = load_json_argument(args.input)
    if not isinstance(obj, dict) or not {"degree", "curve", "point"} <= set(obj):
        raise ParseError('torsor input needs keys "degree", "curve", "point"')
    curve = curve_from_json(obj["curve"])
    point_obj = obj["point"]
    if not isinstance(point_obj, dict) or set(point_obj) != {"base", "t"}:
        raise ParseError('a torsor point is an object with keys "base" and "t"')
    base = point_from_json(point_obj["base"])
    fiber = fraction_from_obj(point_obj["t"])
    bundle = RigidifiedBundle(curve, obj["degree"])
    tpoint = TorsorPoint(base, fiber)
    prec = config.precision
    digits = DECIMAL_DIGITS
    total = torsor_global_height(bundle, tpoint, precision=prec)
    half_degree = Fraction(bundle.degree, 2)
    rows = []
    for place in torsor_places(bundle, tpoint, precision=prec):
        value = torsor_local_height(bundle, tpoint, place, precision=prec)
        if place.is_finite:
            base_term = local_height(curve, base, place, precision=prec)
            v_t = Fraction(_valuation(fiber, place.p))
            exact = half_degree * base_term.log_coefficient + v_t
            exact_str = fraction_to_str(exact)
        else:
            exact_str = None
        rows.append(
            {
                "place": _place_label(place),
                "value": format_decimal(value, digits),
                "exact_part": exact_str,
            }
        )
    payload = {
        "degree": bundle.degree,
        "global": format_decimal(total, digits),
        "local": rows,
    }
    with mp.workdps(working_dps(prec)):
        row_sum = mp.mpf(0)
        for place in torsor_places(bundle, tpoint, precision=prec):
            row_sum += torsor_local_height(bundle, tpoint, place, precision=prec)
        payload["local_sum_difference"] = format_decimal(abs(row_sum - total), digits)
    if "basis" in obj:
        bases = _bases_from_json(obj["basis"], config)
        if len(bases) != 1:
            raise ParseError("torsor augmentation expects a single-curve basis")
        aug = augment_torsor_point(bundle, tpoint, bases[0])
        payload["augmentation"] = {
            "base": augmentation_to_json(aug.base_aug),
            "fiber": valuation_vector_to_json(aug.fiber_class),
        }
    return payload


def _valuation(q: Fraction, p: int) -> int:
    if q == 0:
        raise InputError("zero has no finite valuation")
    v = 0
    num, den = abs(q.numerator), q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def cmd_enumerate(args, config):
    bases = _bases_from_json(load_json_argument(args.basis), config)
    basis = bases[0] if len(bases) == 1 else ProductMWBasis(bases)
    try:
        bound = Fraction(args.bound)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a height bound: {args.bound!r}") from exc
    augs = basis.enumerate_bounded(bound, args.scale)
    return [augmentation_to_json(a) for a in augs]


def cmd_diag(args, config):
    _, corpus, _, quad = _system_from_json(load_json_argument(args.input), config)
    prec = config.precision
    digits = DECIMAL_DIGITS
    square = quad.tensor_power(2)
    payload = {}
    ratio = None
    if len(corpus) >= 6:
        ratio = degree_ratio_diagnostic(square, quad, corpus, precision=prec)
        payload["tensor_ratio"] = _diagnostic_to_json(ratio, digits)
    else:
        payload["tensor_ratio"] = {
            "skipped": "degree-ratio fit needs at least 6 corpus points"
        }
    additivity = additivity_diagnostic(
        quad, quad, square, corpus,
        envelope=config.additivity_envelope, precision=prec,
    )
    payload["additivity"] = _diagnostic_to_json(additivity, digits)
    if args.figures and ratio is not None:
        from . import plots

        os.makedirs(args.figures, exist_ok=True)
        payload["figures"] = [
            plots.plot_ratio_residuals(ratio.samples, args.figures)
        ]
    return payload


def cmd_md(args, config):
    obj = load_json_argument(args.input)
    _, corpus, maps, quad = _system_from_json(obj, config)
    if "basis" not in obj:
        raise ParseError('md input needs a "basis" object for the target curve')
    bases = _bases_from_json(obj["basis"], config)
    if len(bases) != 1:
        raise ParseError("md expects a single-curve basis for the common target")
    basis = bases[0]
    pairing = degree_pairing_from_maps(maps, obj.get("target_degree", 2))
    report = md_report(
        quad,
        basis,
        pairing,
        corpus,
        lattice_scale=obj.get("lattice_scale", 1),
        precision=config.precision,
        cutoff=obj.get("cutoff"),
    )
    digits = DECIMAL_DIGITS
    payload = {
        "r": report.r,
        "rank_target": report.rank_target,
        "criterion": report.criterion_ok,
        "pairing": {
            "matrix": matrix_to_json(report.pairing.matrix, digits),
            "det": fraction_to_str(report.pairing.det),
            "bundle_degree": fraction_to_str(report.pairing.bundle_degree),
        },
        "det_check": (
            _diagnostic_to_json(report.det_check, digits)
            if report.det_check is not None
            else None
        ),
        "det_check_note": report.det_check_note,
        "fitted_constants": [
            format_decimal(c, digits) for c in report.fitted_constants
        ],
        "bound": (
            format_decimal(report.bound, digits) if report.bound is not None else None
        ),
        "bound_note": report.bound_note,
        "lattice_scale": report.lattice_scale,
        "candidates": (
            [augmentation_to_json(a) for a in report.candidates]
            if report.candidates is not None
            else None
        ),
        "soundness": {
            "sound": report.sound,
            "rows": [_json_value(row, digits) for row in report.samples_checked],
        },
        "precision": report.precision,
    }
    if args.figures and payload["det_check"] is not None:
        from . import plots

        os.makedirs(args.figures, exist_ok=True)
        payload["figures"] = [
            plots.plot_det_ratios(report.det_check.samples, args.figures)
        ]
    return payload


# -- human rendering ----------------------------------------------------------


def _human_lines(command, payload):
    if command == "curve":
        lines = [
            f"discriminant: {payload['discriminant']}",
            f"c4: {payload['c4']}  c6: {payload['c6']}",
            f"j-invariant: {payload['j_invariant']}",
            f"torsion: {payload['torsion']['structure']}"
            f" (order {payload['torsion']['order']})",
        ]
        for row in payload["reduction"]:
            tag = f"  p={row['p']}: {row['kind']} (v_disc={row['v_disc']}"
            if row["split"] is not None:
                tag += f", split={row['split']}"
            lines.append(tag + ")")
        return lines
    if command == "height":
        lines = [
            f"hhat: {payload['hhat']}",
            f"method agreement: {payload['method_agreement']}",
        ]
        if payload["local"] is not None:
            for row in payload["local"]:
                exact = row["exact_part"]
                tail = f"  [{exact} * log p]" if exact is not None else ""
                lines.append(f"  v={row['place']}: {row['value']}{tail}")
            if "local_sum_difference" in payload:
                lines.append(f"local sum difference: {payload['local_sum_difference']}")
        return lines
    if command == "decompose":
        return ["coordinates: " + ", ".join(payload["coordinates"])]
    if command == "torsor":
        lines = [f"degree: {payload['degree']}", f"global: {payload['global']}"]
        for row in payload["local"]:
            lines.append(f"  v={row['place']}: {row['value']}")
        if "augmentation" in payload:
            aug = payload["augmentation"]
            fiber = ", ".join(f"{p}^{e}" for p, e in sorted(aug["fiber"].items(), key=lambda kv: int(kv[0])))
            lines.append("augmentation base: " + ", ".join(aug["base"]))
            lines.append("augmentation fiber: " + (fiber or "trivial"))
        return lines
    if command == "enumerate":
        lines = [f"candidates: {len(payload)}"]
        lines.extend("  (" + ", ".join(vec) + ")" for vec in payload)
        return lines
    if command == "diag":
        lines = []
        for key in ("tensor_ratio", "additivity"):
            report = payload[key]
            if "skipped" in report:
                lines.append(f"{key}: skipped ({report['skipped']})")
            else:
                lines.append(
                    f"{key}: {report['verdict']} (spread {report['spread']})"
                )
        return lines
    if command == "md":
        lines = [
            f"criterion: {payload['criterion']}"
            f" (r={payload['r']} vs rank {payload['rank_target']})",
        ]
        if payload["det_check"] is not None:
            lines.append(f"det check: {payload['det_check']['verdict']}")
        if payload["det_check_note"]:
            lines.append(f"note: {payload['det_check_note']}")
        if payload["bound"] is not None:
            lines.append(f"bound: {payload['bound']}")
        else:
            lines.append("bound: not derivable")
        if payload["bound_note"]:
            lines.append(f"note: {payload['bound_note']}")
        if payload["candidates"] is not None:
            lines.append(f"candidates: {len(payload['candidates'])}")
        sound = payload["soundness"]["sound"]
        lines.append(
            "sound: not checked" if sound is None else f"sound: {sound}"
        )
        return lines
    raise HeightlabError(f"no renderer for {command}")  # pragma: no cover


# -- argument parsing and dispatch --------------------------------------------


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help="working decimal digits (default 50)")
    common.add_argument("--json", action="store_true",
                        help="emit canonical JSON instead of the text summary")
    common.add_argument("--seed", type=int, default=None,
                        help="seed echoed for reproducibility")
    common.add_argument("--config", default=None,
                        help="key=value config file")
    common.add_argument("--figures", default=None, metavar="DIR",
                        help="also render figures into DIR")

    parser = argparse.ArgumentParser(
        prog="heightlab",
        description="canonical heights, torsor augmentations, and the "
        "two-map finiteness procedure over Q",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", parents=[common],
                       help="invariants, torsion, and reduction table")
    p.add_argument("input", help="curve JSON (inline or path)")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("height", parents=[common],
                       help="canonical height by both routes")
    p.add_argument("curve", help="curve JSON (inline or path)")
    p.add_argument("point", help="point JSON (inline or path)")
    p.add_argument("--local", action="store_true",
                   help="include the per-place table")
    p.set_defaults(func=cmd_height)

    p = sub.add_parser("decompose", parents=[common],
                       help="coordinates of a point over a basis")
    p.add_argument("basis", help="basis JSON (inline or path)")
    p.add_argument("point", help="point JSON (inline or path)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("torsor", parents=[common],
                       help="torsor heights and augmentation")
    p.add_argument("input", help="torsor JSON (inline or path)")
    p.set_defaults(func=cmd_torsor)

    p = sub.add_parser("enumerate", parents=[common],
                       help="lattice vectors below a height bound")
    p.add_argument("basis", help="basis JSON (inline or path)")
    p.add_argument("bound", help="height bound (rational or decimal)")
    p.add_argument("--scale", type=int, default=1,
                   help="denominator scale n for the (1/n)-lattice")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("diag", parents=[common],
                       help="height-machine diagnostics on a curve system")
    p.add_argument("input", help="system JSON (inline or path)")
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("md", parents=[common],
                       help="finiteness procedure report")
    p.add_argument("input", help="system JSON (inline or path)")
    p.set_defaults(func=cmd_md)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(
            args.config, precision=args.precision, seed=args.seed
        )
    except (ParseError, InputError) as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return 2
    print(f"seed: {config.seed}", file=sys.stderr)
    try:
        payload = args.func(args, config)
    except ParseError as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return 2
    except CurveError as exc:
        print(f"heightlab: invalid curve: {exc}", file=sys.stderr)
        return 3
    except (PointError, DomainError) as exc:
        print(f"heightlab: invalid point: {exc}", file=sys.stderr)
        return 4
    except BasisError as exc:
        print(f"heightlab: invalid basis: {exc}", file=sys.stderr)
        return 5
    except InputError as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return 2
    except HeightlabError as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return 1
    if args.json:
        sys.stdout.write(dumps(payload))
    else:
        for line in _human_lines(args.command, payload):
            print(line)
    return 0
