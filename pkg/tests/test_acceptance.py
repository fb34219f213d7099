"""Acceptance gate: the nine headline checks, one test and one line each.

Every test prints "criterion N (<name>): PASS|FAIL" and then asserts,
so the verdict line is present whichever way the run ends.  Stated
tolerances and runtime budgets are enforced inside each test.
"""

import json
import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath as mp

from heightlab import (
    MWBasis,
    RigidifiedBundle,
    TorsorPoint,
    WeierstrassCurve,
    canonical_height,
    canonical_height_doubling,
    canonical_height_localsum,
    degree_pairing_from_maps,
    degree_ratio_diagnostic,
    det_asymptotic_check,
    enumerate_quadratic_form,
    eval_map,
    height_bilinear,
    kummer_exponent,
    map_sum,
    md_report,
    torsor_global_height,
)
from heightlab.cli import _bases_from_json, _system_from_json
from heightlab.config import Config
from heightlab.curves import ECPoint
from heightlab.jsonio import load_json_argument

mp.mp.dps = 60

DEMO_DIR = Path(__file__).resolve().parent.parent / "demos"

E37 = WeierstrassCurve(0, 0, 1, -1, 0)
E389 = WeierstrassCurve(0, 1, 1, -2, 0)
E5077 = WeierstrassCurve(0, 0, 1, -7, 6)
EK2 = WeierstrassCurve(0, 0, 0, 0, 2)
EM2 = WeierstrassCurve(0, 0, 0, 0, -2)
E11 = WeierstrassCurve(0, -1, 1, -10, -20)


def pt(x, y) -> ECPoint:
    return ECPoint(Fraction(x), Fraction(y))


def _verdict(number, name, failures, elapsed, budget):
    if elapsed > budget:
        failures.append(f"runtime {elapsed:.1f}s over the {budget}s budget")
    ok = not failures
    line = f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'}"
    print(f"{line}  [{elapsed:.1f}s]")
    assert ok, line + "; " + "; ".join(failures)


def test_criterion_1_quadraticity():
    start = time.monotonic()
    tol = mp.mpf("1e-40")
    bases = [
        (E37, pt(0, 0)),
        (E37, E37.mul(2, pt(0, 0))),
        (E37, E37.mul(3, pt(0, 0))),
        (E389, pt(0, 0)),
        (E389, pt(1, 0)),
        (E389, E389.add(pt(0, 0), pt(1, 0))),
        (E5077, pt(-2, 3)),
        (E5077, pt(-1, 3)),
        (E5077, pt(0, 2)),
        (EK2, pt(-1, 1)),
        (EK2, EK2.mul(2, pt(-1, 1))),
        (EK2, EK2.mul(3, pt(-1, 1))),
        (EM2, pt(3, 5)),
        (EM2, EM2.mul(2, pt(3, 5))),
        (EM2, EM2.mul(3, pt(3, 5))),
    ]
    failures = []
    for curve, base in bases:
        h1 = canonical_height_doubling(curve, base)
        for n in range(-8, 9):
            if n == 0:
                continue
            hn = canonical_height_doubling(curve, curve.mul(n, base))
            if abs(hn - n * n * h1) > tol:
                failures.append(
                    f"{curve.ainvs_str()} n={n}: |h(nP)-n^2 h(P)| = "
                    f"{mp.nstr(abs(hn - n * n * h1), 5)}"
                )
    _verdict(1, "quadraticity", failures, time.monotonic() - start, 60)


def _corpus_20():
    g1, g2 = pt(0, 0), pt(1, 0)
    a, b, c = pt(-2, 3), pt(-1, 3), pt(0, 2)
    p37 = pt(0, 0)
    pk2 = pt(-1, 1)
    pm2 = pt(3, 5)
    points = [
        (E37, p37),
        (E37, E37.mul(2, p37)),
        (E37, E37.mul(3, p37)),
        (E37, E37.mul(5, p37)),
        (E37, E37.neg(p37)),
        (E389, g1),
        (E389, g2),
        (E389, E389.add(g1, g2)),
        (E389, E389.mul(2, g1)),
        (E389, E389.sub(g1, g2)),
        (E5077, a),
        (E5077, b),
        (E5077, c),
        (E5077, E5077.add(a, b)),
        (EK2, pk2),
        (EK2, EK2.mul(2, pk2)),
        (EK2, EK2.mul(3, pk2)),
        (EM2, pm2),
        (EM2, EM2.mul(2, pm2)),
        (E11, pt(5, 5)),
    ]
    assert len(points) == 20
    return points


def test_criterion_2_local_decomposition():
    start = time.monotonic()
    tol = mp.mpf("1e-40")
    failures = []
    for curve, point in _corpus_20():
        d = canonical_height_doubling(curve, point)
        s = canonical_height_localsum(curve, point)
        if abs(d - s) > tol:
            failures.append(
                f"{curve.ainvs_str()} {point}: routes differ by "
                f"{mp.nstr(abs(d - s), 5)}"
            )
    _verdict(2, "local decomposition", failures, time.monotonic() - start, 120)


def test_criterion_3_lift_independence(rng):
    start = time.monotonic()
    tol = mp.mpf("1e-40")
    bundle = RigidifiedBundle(E37, 2)
    base = E37.mul(5, pt(0, 0))
    reference = torsor_global_height(bundle, TorsorPoint(base, Fraction(1)))
    failures = []
    for _ in range(10):
        kappa = Fraction(
            rng.choice([-1, 1]) * rng.randint(1, 10**4), rng.randint(1, 10**4)
        )
        value = torsor_global_height(bundle, TorsorPoint(base, kappa))
        if abs(value - reference) > tol:
            failures.append(
                f"kappa={kappa}: height moved by {mp.nstr(abs(value - reference), 5)}"
            )
    _verdict(3, "torsor lift independence", failures, time.monotonic() - start, 30)


def test_criterion_4_parallelogram_cauchy_schwarz(rng):
    start = time.monotonic()
    tol_par = mp.mpf("1e-35")
    slack_cs = mp.mpf("1e-10")
    g1, g2 = pt(0, 0), pt(1, 0)
    combos = {}
    heights = {}

    def combo(a, b):
        if (a, b) not in combos:
            combos[(a, b)] = E389.add(E389.mul(a, g1), E389.mul(b, g2))
        return combos[(a, b)]

    def height(a, b):
        if (a, b) not in heights:
            heights[(a, b)] = canonical_height_doubling(E389, combo(a, b))
        return heights[(a, b)]

    failures = []
    for _ in range(200):
        a, b, c, d = (rng.randint(-4, 4) for _ in range(4))
        hp, hq = height(a, b), height(c, d)
        h_sum = height(a + c, b + d)
        h_diff = height(a - c, b - d)
        gap = abs(h_sum + h_diff - 2 * hp - 2 * hq)
        if gap > tol_par:
            failures.append(f"parallelogram ({a},{b})x({c},{d}): gap {mp.nstr(gap, 5)}")
        pairing = (h_sum - hp - hq) / 2
        if abs(pairing) > mp.sqrt(hp * hq) + slack_cs:
            failures.append(
                f"cauchy-schwarz ({a},{b})x({c},{d}): |b|/2 = {mp.nstr(abs(pairing), 5)}"
            )
    _verdict(
        4, "parallelogram and cauchy-schwarz", failures, time.monotonic() - start, 120
    )


def _brute_force(gram, bound, n):
    r = len(gram)
    limit = int(n * math.isqrt(int(bound) + 1) + n * 2) + 2
    target = 2 * bound * n * n
    out = []

    def scan(prefix):
        if len(prefix) == r:
            q = sum(
                prefix[i] * prefix[j] * gram[i][j]
                for i in range(r)
                for j in range(r)
            )
            if q <= target:
                out.append(tuple(Fraction(m, n) for m in prefix))
            return
        for m in range(-limit, limit + 1):
            scan(prefix + [m])

    scan([])
    return sorted(out)


def test_criterion_5_enumeration_matches_brute_force(rng):
    start = time.monotonic()
    failures = []
    for trial in range(20):
        r = rng.randint(1, 3)
        mat = [[rng.randint(-3, 3) for _ in range(r)] for _ in range(r)]
        gram = [
            [
                Fraction(sum(mat[k][i] * mat[k][j] for k in range(r)))
                + (Fraction(4) if i == j else 0)
                for j in range(r)
            ]
            for i in range(r)
        ]
        bound = Fraction(rng.randint(1, 80), 10)
        n = rng.choice([1, 2])
        got = sorted(tuple(a) for a in enumerate_quadratic_form(gram, bound, n))
        want = _brute_force(gram, bound, n)
        if got != want:
            failures.append(f"trial {trial}: rank {r}, B={bound}, n={n} disagree")
    basis = MWBasis(E37, [pt(0, 0)])
    got = [tuple(a) for a in basis.enumerate_bounded(Fraction(1, 5))]
    h1 = canonical_height(E37, pt(0, 0))
    want = [
        (Fraction(a),)
        for a in range(-4, 5)
        if a * a * h1 <= mp.mpf("0.2")
    ]
    if got != sorted(want):
        failures.append(f"37a1 B=0.2 gave {got}")
    if len(got) != 3:
        failures.append(f"37a1 B=0.2 expected 3 candidates, got {len(got)}")
    _verdict(5, "enumeration oracle", failures, time.monotonic() - start, 60)


def test_criterion_6_kummer_exponent():
    start = time.monotonic()
    failures = []
    for args, want in (((2, 1), 64), ((2, 4), 256), ((6, 1), 5184)):
        got = kummer_exponent(*args)
        if got != want:
            failures.append(f"kummer_exponent{args} = {got}, want {want}")
    _verdict(6, "kummer exponent", failures, time.monotonic() - start, 60)


def test_criterion_7_degree_ratio_law():
    start = time.monotonic()
    failures = []

    system = load_json_argument(str(DEMO_DIR / "md_ratio37.json"))
    _, corpus, _, quad = _system_from_json(system, Config())
    report = degree_ratio_diagnostic(quad.tensor_power(2), quad, corpus)
    if not report.passed:
        failures.append("tensor-pair fit did not pass")
    for sample in report.samples:
        if sample["residual"] != 0:
            failures.append(
                f"tensor pair residual nonzero at {sample['point']}: "
                f"{mp.nstr(sample['residual'], 5)}"
            )

    system = load_json_argument(str(DEMO_DIR / "md_bielliptic.json"))
    _, corpus, maps, quad = _system_from_json(system, Config())
    f1, f2 = maps
    target = f1.target
    rows = []
    for point in corpus:
        img1, img2 = eval_map(f1, point), eval_map(f2, point)
        both = target.add(img1, img2)
        residual = (
            canonical_height(target, both)
            - canonical_height(target, img1)
            - canonical_height(target, img2)
        )
        h_l = mp.mpf(0)
        for rmap, w, d in quad.maps:
            h_l += (
                mp.mpf(w * d) / 2
                * canonical_height(target, eval_map(rmap, point))
            )
        rows.append((h_l, abs(residual) / (1 + mp.sqrt(h_l))))
    rows.sort(key=lambda t: t[0])
    half = len(rows) // 2
    c_bottom = max(c for _, c in rows[:half])
    c_top = max(c for _, c in rows[half:])
    if c_top > c_bottom + mp.mpf("1e-30"):
        failures.append(
            f"pairing-class envelope grew: top {mp.nstr(c_top, 8)} vs "
            f"bottom {mp.nstr(c_bottom, 8)}"
        )
    _verdict(7, "degree-ratio law", failures, time.monotonic() - start, 120)


def test_criterion_8_finiteness_end_to_end():
    start = time.monotonic()
    failures = []
    for name in ("md_rank0.json", "md_bielliptic.json"):
        obj = load_json_argument(str(DEMO_DIR / name))
        _, corpus, maps, quad = _system_from_json(obj, Config())
        basis = _bases_from_json(obj["basis"], Config())[0]
        pairing = degree_pairing_from_maps(maps, obj.get("target_degree", 2))
        report = md_report(
            quad, basis, pairing, corpus,
            lattice_scale=obj.get("lattice_scale", 1),
            cutoff=obj.get("cutoff"),
        )
        if report.candidates is None:
            failures.append(f"{name}: no candidate list")
            continue
        if not report.sound:
            failures.append(f"{name}: an image augmentation fell outside")
        for row in report.samples_checked:
            if row["status"] != "ok":
                failures.append(f"{name}: {row['point']} -> {row['status']}")
            for image in row["images"]:
                if not image["contained"]:
                    failures.append(
                        f"{name}: image {image['augmentation']} not a candidate"
                    )

    obj = load_json_argument(str(DEMO_DIR / "md_ratio37.json"))
    _, corpus, maps, quad = _system_from_json(obj, Config())
    pairing = degree_pairing_from_maps(maps, obj.get("target_degree", 2))
    check = det_asymptotic_check(pairing, quad, corpus)
    if check.verdict != "pass":
        failures.append("ratio demo det check did not pass")
    tercile = check.samples[len(check.samples) - max(1, len(check.samples) // 3):]
    for sample in tercile:
        if not mp.mpf("0.5") <= sample["ratio"] <= mp.mpf("1.5"):
            failures.append(
                f"tercile ratio {mp.nstr(sample['ratio'], 6)} outside [0.5, 1.5]"
            )
    _verdict(8, "finiteness end-to-end", failures, time.monotonic() - start, 300)


def test_criterion_9_cli_determinism():
    start = time.monotonic()
    e37 = '{"a1":"0/1","a2":"0/1","a3":"1/1","a4":"-1/1","a6":"0/1"}'
    b37 = (
        '{"curves":[' + e37 + '],"generators":[[{"x":"0/1","y":"0/1"}]]}'
    )
    torsor_spec = (
        '{"degree": 2, "curve": ' + e37 + ', '
        '"point": {"base": {"x":"1/4","y":"-5/8"}, "t": "12/1"}, '
        '"basis": ' + b37 + "}"
    )
    suite = [
        ["curve", e37],
        ["height", e37, '{"x":"0/1","y":"0/1"}', "--local"],
        ["decompose", b37, '{"x":"1/4","y":"-5/8"}'],
        ["torsor", torsor_spec],
        ["enumerate", b37, "0.2"],
        ["diag", str(DEMO_DIR / "md_ratio37.json")],
        ["md", str(DEMO_DIR / "md_rank0.json")],
        ["md", str(DEMO_DIR / "md_bielliptic.json")],
        ["md", str(DEMO_DIR / "md_ratio37.json")],
    ]
    failures = []
    for argv in suite:
        cmd = [sys.executable, "-m", "heightlab"] + argv + ["--json", "--seed", "0"]
        first = subprocess.run(cmd, capture_output=True, check=False)
        second = subprocess.run(cmd, capture_output=True, check=False)
        if first.returncode != 0 or second.returncode != 0:
            failures.append(f"{argv[0]}: nonzero exit {first.returncode}")
            continue
        if first.stdout != second.stdout:
            failures.append(f"{argv[0]}: outputs differ between runs")
        try:
            json.loads(first.stdout)
        except json.JSONDecodeError:
            failures.append(f"{argv[0]}: output is not valid JSON")
    _verdict(9, "cli determinism", failures, time.monotonic() - start, 300)
