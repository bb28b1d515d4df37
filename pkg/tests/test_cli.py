from __future__ import annotations

import csv
import json

import pytest

from regulator_lab.cli import main, read_config
from regulator_lab.verify import RunConfig, UsageError, theorem_report


def test_gap_parameter_is_usage_error(capsys):
    assert main(["verify", "theorem", "--k", "5"]) == 2
    assert "gap" in capsys.readouterr().err


def test_argparse_errors_exit_two():
    assert main(["verify", "theorem", "--k", "abc"]) == 2
    assert main(["verify", "nonsense"]) == 2


def test_passing_run_writes_json_and_csv(tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["verify", "theorem", "--k-grid", "-2,20", "--out", str(out), "--csv", str(table)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"version", "config", "reports"}
    rep = doc["reports"][0]
    for key in ("checkId", "inputs", "lhs", "rhs", "absError", "multipliers", "pass", "runtimeMs"):
        assert key in rep
    rows = list(csv.DictReader(table.open()))
    assert [r["checkId"] for r in rows] == ["theorem[k=-2]", "theorem[k=20]"]


def test_failing_check_exits_one(capsys):
    assert main(["verify", "theorem", "--k", "20", "--tol", "1e-300"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nk-grid = -2, -3\ntol = 1e-7\n")
    assert read_config(cfg) == {"k_grid": "-2, -3", "tol": "1e-7"}
    out = tmp_path / "r.json"
    assert main(["verify", "theorem", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["k_grid"] == [-2, -3] and doc["config"]["tol"] == 1e-7


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["verify", "theorem", "--config", str(cfg)]) == 2


def test_reports_are_deterministic_apart_from_timing():
    a, b = theorem_report(-3).to_json(), theorem_report(-3).to_json()
    a.pop("runtimeMs"), b.pop("runtimeMs")
    assert a == b


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(k_grid=())
    with pytest.raises(UsageError):
        RunConfig(jobs=0)


@pytest.mark.parametrize("argv", [["mahler", "eval", "--poly", "x + y + 2"], ["dilog", "--z", "0.5+0.5j"],
                                  ["dilog", "--k", "-5"], ["curve", "info", "--k", "-1"]])
def test_informational_commands(argv, capsys):
    assert main(argv) == 0
    assert capsys.readouterr().out
