import json
import subprocess
import sys

import numpy as np
import pytest

from nilkl import build_family
from nilkl.cli import main
from nilkl.errors import InvalidStructure, ParseError
from nilkl.report import build_report, parse_structure, render_text, structure_to_json


def write(tmp_path, obj, name="s.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


class TestParse:
    def test_kodaira(self):
        data = parse_structure({"n": 2, "C": [], "D": [[1, 2, 1, -1.0, 0.0]]})
        ref = build_family("kodaira", {"lambda": 1.0})
        assert np.array_equal(data.D, ref.D) and np.array_equal(data.C, ref.C)

    def test_abelian(self):
        data = parse_structure({"n": 3, "C": [], "D": []})
        assert data.n == 3 and not data.C.any() and not data.D.any()

    def test_terms_mode(self):
        data = parse_structure({"n": 3, "terms": {"3": {"hol": [[1, 2, -1.0, 0.0]]}}})
        np.testing.assert_array_equal(data.C, build_family("iwasawa").C)

    @pytest.mark.parametrize("obj", [
        {"n": 3, "C": [[3, 1, 2, 1.0, 0.0], [3, 2, 1, -1.0, 0.0]], "D": []},
        {"n": 3, "C": [[3, 2, 1, 1.0, 0.0]], "D": []},
        {"n": 3, "C": [[3, 1, 1, 1.0, 0.0]], "D": []},
        {"n": 2, "C": [], "D": [[1, 2, 1, 1.0, 0.0], [1, 2, 1, 2.0, 0.0]]},
        {"n": 2, "C": [], "D": [[1, 2, 3, 1.0, 0.0]]},
        {"n": 2, "C": [], "D": [[1, 2, 1, "x", 0.0]]},
        {"n": 2, "C": [], "D": [[1, 2, 1, 1.0]]},
        {"n": 0, "C": [], "D": []},
        {"n": True, "C": [], "D": []},
        {"n": 2, "C": [], "D": [], "E": []},
        {"n": 2, "terms": {"x": {}}},
        {"n": 2, "terms": {"2": {"other": []}}},
        [1, 2],
    ])
    def test_parse_errors(self, obj):
        with pytest.raises(ParseError):
            parse_structure(obj)

    def test_conflicting_pair_message(self):
        with pytest.raises(ParseError, match="conflicting antisymmetric pair"):
            parse_structure({"n": 3, "C": [[3, 1, 2, 1.0, 0.0], [3, 2, 1, -1.0, 0.0]], "D": []})

    def test_invalid_structure(self):
        obj = {"n": 2, "C": [], "D": [[1, 2, 1, -1.0, 0.0], [2, 1, 2, -1.0, 0.0]]}
        with pytest.raises(InvalidStructure):
            parse_structure(obj)
        assert parse_structure(obj, check=False).n == 2

    @pytest.mark.parametrize("name,params", [
        ("kodaira", {"lambda": 0.1 + 0.2}),
        ("iwasawa", {}),
        ("cor12", {"n": 6, "variant": "b", "a": 0.7, "b": -1.3, "c": 0.4, "x": 0.9}),
    ])
    def test_round_trip_bit_exact(self, name, params):
        data = build_family(name, params)
        text = json.dumps(structure_to_json(data))
        back = parse_structure(json.loads(text))
        # signed zeros aside, every value survives the decimal rendering
        assert np.array_equal(back.C, data.C) and np.array_equal(back.D, data.D)


class TestReport:
    def test_kodaira(self, kodaira):
        rep = build_report(kodaira)
        assert rep["skl"]["verdict"] and not rep["ckl"]["verdict"] and not rep["rkl"]["verdict"]
        assert rep["skl"]["lambdas"] == pytest.approx([np.sqrt(2)])
        assert rep["ckl"]["witness"]["component"] in ([2, 1, 2, 1], [2, 2, 1, 1])

    def test_abelian(self):
        rep = build_report(build_family("abelian", {"n": 2}))
        assert rep["skl"]["verdict"] and rep["ckl"]["verdict"] and rep["rkl"]["verdict"]
        for block in rep["connections"].values():
            assert block["curvature_norm"]["residual"] == 0

    def test_iwasawa(self, iwasawa):
        rep = build_report(iwasawa)
        assert rep["ckl"]["verdict"] and rep["connections"]["chern"]["curvature_norm"]["residual"] == 0
        assert not rep["skl"]["verdict"] and not rep["rkl"]["verdict"]

    def test_not_nilpotent(self):
        rep = build_report(parse_structure({"n": 1, "C": [], "D": [[1, 1, 1, 1.0, 0.0]]}))
        assert rep["skl"] == {"verdict": None, "stage": "not-nilpotent"}
        assert "nilpotent" in render_text(rep)

    def test_invalid_report_stops_after_validity(self):
        obj = {"n": 2, "C": [], "D": [[1, 2, 1, -1.0, 0.0], [2, 1, 2, -1.0, 0.0]]}
        rep = build_report(parse_structure(obj, check=False))
        assert not rep["validity"]["valid"] and "skl" not in rep


class TestMain:
    def test_analyze_json_stable_under_reordering(self, tmp_path, capsys):
        data = build_family("cor12", {"n": 5, "variant": "b", "a": 0.7, "b": -1.3, "c": 0.4})
        obj = structure_to_json(data)
        p1 = write(tmp_path, obj, "a.json")
        obj["D"] = obj["D"][::-1]
        p2 = write(tmp_path, obj, "b.json")
        assert main(["analyze", p1, "--json"]) == 0
        out1 = capsys.readouterr().out
        assert main(["analyze", p2, "--json"]) == 0
        assert capsys.readouterr().out == out1
        assert json.loads(out1)["skl"]["verdict"] is True

    def test_analyze_text(self, tmp_path, capsys):
        path = write(tmp_path, {"n": 2, "C": [], "D": [[1, 2, 1, -1.0, 0.0]]})
        assert main(["analyze", path]) == 0
        assert "valid" in capsys.readouterr().out

    def test_exit_codes(self, tmp_path, capsys):
        assert main(["validate", write(tmp_path, "{not json")]) == 2
        assert main(["validate", str(tmp_path / "missing.json")]) == 2
        bad = {"n": 2, "C": [], "D": [[1, 2, 1, -1.0, 0.0], [2, 1, 2, -1.0, 0.0]]}
        assert main(["validate", write(tmp_path, bad)]) == 1
        assert "valid=no" in capsys.readouterr().out
        assert main(["analyze", write(tmp_path, bad)]) == 1
        assert main(["validate", write(tmp_path, {"n": 3, "C": [], "D": []})]) == 0
        sl = {"n": 1, "C": [], "D": [[1, 1, 1, 1.0, 0.0]]}
        assert main(["classify-skl", write(tmp_path, sl)]) == 3
        assert main(["generate", "--family", "kodaira", "--params", "lambda=-1"]) == 1
        assert main(["generate", "--family", "kodaira", "--params", "lambda"]) == 2

    def test_classify_skl(self, tmp_path, capsys):
        path = write(tmp_path, structure_to_json(build_family("cor12", {"n": 3, "a": 1.0})))
        assert main(["classify-skl", path]) == 0
        out = capsys.readouterr().out
        assert "verdict=yes" in out and "r=2 s=2" in out

    def test_generate_round_trip(self, tmp_path):
        out = tmp_path / "g.json"
        params = "n=6,variant=c,a=0.7,b=-1.3,c=0.1,lambda3=2.5"
        assert main(["generate", "--family", "cor12", "--params", params, "--out", str(out)]) == 0
        back = parse_structure(json.loads(out.read_text()))
        ref = build_family("cor12", {"n": 6, "variant": "c", "a": 0.7, "b": -1.3, "c": 0.1, "lambda3": 2.5})
        assert np.array_equal(back.C, ref.C) and np.array_equal(back.D, ref.D)

    def test_random(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["random", "--n", "4", "--r", "2", "--seed", "7", "--out", str(out)]) == 0
        assert parse_structure(json.loads(out.read_text())).n == 4

    def test_subprocess(self, tmp_path):
        path = write(tmp_path, {"n": 3, "terms": {"3": {"hol": [[1, 2, -1.0, 0.0]]}}})
        proc = subprocess.run([sys.executable, "-m", "nilkl.cli", "analyze", path, "--json"],
                              capture_output=True, text=True, check=True)
        rep = json.loads(proc.stdout)
        assert rep["ckl"]["verdict"] and not rep["skl"]["verdict"]
