from __future__ import annotations

import json
import subprocess
import sys

import pytest

from tglab.cli import main


def _run(capsys, *argv: str) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


def _json(capsys, *argv: str) -> dict:
    code, out = _run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def test_thompson_golden(capsys):
    assert _json(capsys, "thompson", "mul", "A", "A^-1")["class"] == "identity"
    assert _json(capsys, "thompson", "orbit", "r2", "1/4", "--steps", "4")["orbit"] == ["1/4", "1/2", "3/4", "0", "1/4"]
    assert _json(capsys, "thompson", "classify", "r3")["class"] == "T_only"
    inv = _json(capsys, "thompson", "inv", "A")
    assert inv["element"] == "{range: (* (* *)), domain: ((* *) *), perm: [1,2,3]}"
    pieces = _json(capsys, "thompson", "pl", "A")["pieces"]
    assert [p["slope_exponent"] for p in pieces] == [-1, 0, 1]


def test_lattice_golden(capsys):
    out = _json(capsys, "lattice", "holonomy", "--group", "zmod:7", "--tree", "( * * )", "--values", "3,5")
    assert out == {"0": 1, "1/2": 5}
    out = _json(capsys, "lattice", "gauge", "--group", "zmod:3", "--tree", "*", "--values", "2", "--gauge", "0:1")
    assert out["values"] == [2]
    out = _json(capsys, "lattice", "jones", "--group", "zmod:3", "--tree", "(* *)", "--values", "1,2", "--element", "r1")
    assert out["values"] == [2, 1]


def test_state_golden(capsys):
    out = _json(capsys, "state", "check-preserving", "--group", "zmod:2", "--seed", "7")
    assert out["max_residual"] == 0 and out["nonzero"] == 0 and out["samples"] == 100
    out = _json(capsys, "state", "check-jones", "--const-weights", "w:3/4,1/4", "--seed", "7")
    assert out["max_residual"] == 0
    out = _json(capsys, "state", "check-gauge", "--group", "zmod:3", "--seed", "1", "--samples", "20")
    assert out["nonzero"] == 0
    out = _json(capsys, "state", "eval", "--cylinder", "0:{0}", "--beta", "const:6.283185307179586")
    assert abs(out["value"]["re"] - 0.920444) < 5e-6
    element = json.dumps({"tree": "*", "group": "zmod:2", "terms": [{"label": [1], "re": [1, 1]}]})
    out = _json(capsys, "state", "eval", "--element", element, "--weights", "w:3/4,1/4")
    assert out["value"]["re"] == pytest.approx(0.5)


def test_measure_golden(capsys):
    out = _json(capsys, "measure", "kakutani", "--beta", "tau:3", "--transform", "halve", "--levels", "14")
    assert out["verdict"] == "Singular"
    assert {"terms_by_level", "partial_sums", "verdict", "evidence"} <= set(out)
    assert abs(_json(capsys, "measure", "zb", "--b", "6.283185307179586")["Z"] - 1.0864348) < 1e-7
    assert _json(capsys, "measure", "hellinger", "--b", "1", "--k", "2")["rho"] == pytest.approx(0.6065306597)
    out = _json(capsys, "measure", "semifinite", "--beta", "tau:3", "--levels", "9")
    assert out["partial_sums"][9] > 10
    out = _json(capsys, "measure", "summability", "--beta", "tau:3", "--p", "0.4")
    assert out["p_summable"]["value"] == pytest.approx(4.36251, abs=1e-4)
    assert set(_json(capsys, "measure", "rotsupport", "--element", "r1", "--levels", "6")["support"]) <= {"0", "1/2"}
    assert 0 < _json(capsys, "measure", "closure", "--beta", "tau:3", "--n", "2")["mass"] < 1


def test_csv_and_text_formats(capsys):
    code, out = _run(capsys, "measure", "kakutani", "--beta", "tau:3", "--transform", "translate:{0}@1", "--levels", "3", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("level,terms_by_level,partial_sums")
    assert len(lines) == 5
    code, out = _run(capsys, "thompson", "classify", "C", "--format", "text")
    assert out.splitlines()[-1] == "class: T_only"


def test_inconclusive_exit_code(capsys):
    code, out = _run(
        capsys, "measure", "kakutani", "--beta", "ell:1,0.5,0.2,0.05,0.01;geom:0.5", "--transform", "translate:{0}@1", "--levels", "4"
    )
    assert code == 3
    assert json.loads(out)["verdict"] == "Inconclusive"


def test_parse_errors_exit_with_two(capsys):
    assert main(["thompson", "mul", "A.Q"]) == 2
    assert "position 2" in capsys.readouterr().err
    assert main(["lattice", "holonomy", "--group", "z7", "--tree", "*", "--values", "1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["measure", "zb"])
    assert exc.value.code == 2


def test_seeded_reports_are_byte_identical(capsys, monkeypatch):
    argv = ["state", "check-preserving", "--group", "zmod:3", "--seed", "11", "--samples", "30"]
    _, first = _run(capsys, *argv)
    _, second = _run(capsys, *argv)
    monkeypatch.setenv("TG_LAB_THREADS", "3")
    _, threaded = _run(capsys, *argv)
    assert first == second == threaded


def test_thread_setting_is_validated(capsys, monkeypatch):
    monkeypatch.setenv("TG_LAB_THREADS", "zero")
    assert main(["state", "check-gauge", "--group", "zmod:2", "--samples", "2"]) == 2


def test_module_entry_point():
    done = subprocess.run(
        [sys.executable, "-m", "tglab", "thompson", "classify", "r3"], capture_output=True, text=True, check=False
    )
    assert done.returncode == 0
    assert json.loads(done.stdout)["class"] == "T_only"
