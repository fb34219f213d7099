"""Front-end exit codes, wire formats, and output determinism."""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from heightlab.cli import main

E37 = '{"a1":"0/1","a2":"0/1","a3":"1/1","a4":"-1/1","a6":"0/1"}'
E389 = '{"a1":"0/1","a2":"1/1","a3":"1/1","a4":"-2/1","a6":"0/1"}'
SINGULAR = '{"a1":"0/1","a2":"0/1","a3":"0/1","a4":"0/1","a6":"0/1"}'
B37 = (
    '{"curves":[' + E37 + '],"generators":[[{"x":"0/1","y":"0/1"}]]}'
)
B389_PARTIAL = (
    '{"curves":[' + E389 + '],"generators":[[{"x":"0/1","y":"0/1"}]]}'
)
B37_DEPENDENT = (
    '{"curves":[' + E37 + '],'
    '"generators":[[{"x":"0/1","y":"0/1"},{"x":"1/1","y":"0/1"}]]}'
)

DEMO_DIR = Path(__file__).resolve().parent.parent / "demos"


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    captured = capsys.readouterr()
    return code, json.loads(captured.out), captured.err


class TestCurve:
    def test_summary_37a1(self, capsys):
        code, payload, _ = run_json(capsys, ["curve", E37])
        assert code == 0
        assert payload["discriminant"] == "37/1"
        assert payload["torsion"]["structure"] == "trivial"
        assert payload["torsion"]["order"] == 1
        assert payload["reduction"] == [
            {"p": "37", "kind": "multiplicative", "v_disc": 1, "split": False}
        ]

    def test_singular_curve_exits_3(self, capsys):
        assert main(["curve", SINGULAR]) == 3

    def test_malformed_json_exits_2_with_position(self, capsys):
        code = main(["curve", '{"a1":'])
        captured = capsys.readouterr()
        assert code == 2
        assert "line 1" in captured.err and "column" in captured.err

    def test_missing_file_exits_2(self, capsys):
        assert main(["curve", "/definitely/not/here.json"]) == 2


class TestHeight:
    def test_generator_height_both_routes(self, capsys):
        code, payload, _ = run_json(
            capsys,
            ["height", E37, '{"x":"0/1","y":"0/1"}', "--local"],
        )
        assert code == 0
        assert payload["hhat"].startswith("0.0511114082399688")
        assert float(payload["method_agreement"]) < 1e-40
        assert payload["local_sum_within_1e-8"] is True
        assert float(payload["local_sum_difference"]) < 1e-40
        places = [row["place"] for row in payload["local"]]
        assert "inf" in places

    def test_torsion_point_empty_table(self, capsys):
        code, payload, _ = run_json(
            capsys,
            [
                "height",
                '{"a1":"0/1","a2":"0/1","a3":"0/1","a4":"-1/1","a6":"0/1"}',
                '{"x":"1/1","y":"0/1"}',
                "--local",
            ],
        )
        assert code == 0
        assert payload["hhat"] == "0.0"
        assert payload["local"] == []

    def test_off_curve_point_exits_4(self, capsys):
        assert main(["height", E37, '{"x":"5/1","y":"5/1"}']) == 4


class TestDecompose:
    def test_fifth_multiple(self, capsys):
        code, payload, _ = run_json(
            capsys, ["decompose", B37, '{"x":"1/4","y":"-5/8"}']
        )
        assert code == 0
        assert payload["coordinates"] == ["5/1"]
        assert payload["verified"] is True

    def test_point_outside_partial_basis_exits_5(self, capsys):
        # (1, 0) generates a direction the one-generator basis misses.
        assert main(["decompose", B389_PARTIAL, '{"x":"1/1","y":"0/1"}']) == 5


class TestEnumerate:
    def test_three_candidates(self, capsys):
        code, payload, _ = run_json(capsys, ["enumerate", B37, "0.2"])
        assert code == 0
        assert payload == [["-1/1"], ["0/1"], ["1/1"]]

    def test_zero_bound_gives_origin(self, capsys):
        code, payload, _ = run_json(capsys, ["enumerate", B37, "0"])
        assert code == 0
        assert payload == [["0/1"]]

    def test_half_lattice(self, capsys):
        code, payload, _ = run_json(
            capsys, ["enumerate", B37, "0.05", "--scale", "2"]
        )
        assert code == 0
        assert payload == [["-1/2"], ["0/1"], ["1/2"]]

    def test_dependent_basis_exits_5(self, capsys):
        assert main(["enumerate", B37_DEPENDENT, "0.2"]) == 5


class TestTorsor:
    def test_height_table_and_augmentation(self, capsys):
        spec = (
            '{"degree": 2, "curve": ' + E37 + ', '
            '"point": {"base": {"x":"1/4","y":"-5/8"}, "t": "12/1"}, '
            '"basis": ' + B37 + "}"
        )
        code, payload, _ = run_json(capsys, ["torsor", spec])
        assert code == 0
        assert payload["global"].startswith("1.27778520599922100")
        assert payload["local_sum_difference"] == "0.0"
        assert payload["augmentation"]["base"] == ["5/1"]
        assert payload["augmentation"]["fiber"] == {"2": "2/1", "3": "1/1"}
        by_place = {row["place"]: row for row in payload["local"]}
        assert by_place["2"]["exact_part"] == "4/1"
        assert by_place["3"]["exact_part"] == "1/1"
        assert by_place["inf"]["exact_part"] is None


class TestDiag:
    def test_tensor_pair_is_exact(self, capsys):
        code, payload, _ = run_json(
            capsys, ["diag", str(DEMO_DIR / "md_ratio37.json")]
        )
        assert code == 0
        assert payload["tensor_ratio"]["verdict"] == "pass"
        assert payload["tensor_ratio"]["spread"] == "0.0"
        assert payload["additivity"]["verdict"] == "pass"
        assert payload["additivity"]["spread"] == "0.0"

    def test_small_corpus_skips_ratio_fit(self, capsys):
        code, payload, _ = run_json(
            capsys, ["diag", str(DEMO_DIR / "md_bielliptic.json")]
        )
        assert code == 0
        assert "skipped" in payload["tensor_ratio"]
        assert payload["additivity"]["verdict"] == "pass"


class TestMD:
    def test_rank_zero_demo(self, capsys):
        code, payload, _ = run_json(
            capsys, ["md", str(DEMO_DIR / "md_rank0.json")]
        )
        assert code == 0
        assert payload["criterion"] is True
        assert payload["bound"] == "0.0"
        assert payload["candidates"] == [[]]
        assert payload["soundness"]["sound"] is True

    def test_bielliptic_demo(self, capsys):
        code, payload, _ = run_json(
            capsys, ["md", str(DEMO_DIR / "md_bielliptic.json")]
        )
        assert code == 0
        assert payload["criterion"] is True
        assert payload["det_check"]["verdict"] == "fail"
        assert payload["bound"].startswith("1.16062333807")
        assert payload["candidates"] == [["-1/1"], ["0/1"], ["1/1"]]
        assert payload["pairing"]["det"] == "64/1"
        assert payload["pairing"]["bundle_degree"] == "8/1"
        assert payload["soundness"]["sound"] is True
        for row in payload["soundness"]["rows"]:
            assert row["status"] == "ok"
            assert all(img["contained"] for img in row["images"])

    def test_criterion_failure_is_data_not_error(self, capsys):
        code, payload, _ = run_json(
            capsys, ["md", str(DEMO_DIR / "md_ratio37.json")]
        )
        assert code == 0
        assert payload["criterion"] is False
        assert payload["bound"] is None
        assert "criterion fails" in payload["bound_note"]
        assert payload["candidates"] is None
        assert payload["det_check"]["verdict"] == "pass"

    def test_missing_file_exits_2(self, capsys):
        assert main(["md", "/no/such/demo.json"]) == 2


class TestPlumbing:
    def test_seed_echoed_on_stderr(self, capsys):
        code, _, err = run_json(capsys, ["curve", E37, "--seed", "7"])
        assert code == 0
        assert "seed: 7" in err

    def test_config_file_round_trip(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("precision = 30\nseed = 3\n")
        code, _, err = run_json(
            capsys, ["curve", E37, "--config", str(cfg)]
        )
        assert code == 0
        assert "seed: 3" in err

    def test_bad_config_key_exits_2(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("wibble = 9\n")
        assert main(["curve", E37, "--config", str(cfg)]) == 2

    def test_figures_rendered_on_request(self, capsys, tmp_path):
        out = tmp_path / "figs"
        code, payload, _ = run_json(
            capsys,
            [
                "height", E37, '{"x":"0/1","y":"0/1"}',
                "--local", "--figures", str(out),
            ],
        )
        assert code == 0
        for path in payload["figures"]:
            assert os.path.exists(path)

    def test_byte_identical_reruns(self):
        cmd = [
            sys.executable, "-m", "heightlab",
            "md", str(DEMO_DIR / "md_rank0.json"), "--json",
        ]
        first = subprocess.run(cmd, capture_output=True, check=True)
        second = subprocess.run(cmd, capture_output=True, check=True)
        assert first.stdout == second.stdout
        assert first.stdout.strip().startswith(b"{")
