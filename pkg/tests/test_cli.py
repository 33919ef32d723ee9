import json
import subprocess
import sys

import pytest

from extremal_hull.cli import main
from extremal_hull.experiments import EXPERIMENT_IDS


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.delenv("EXTREMAL_HULL_OUT", raising=False)
    return tmp_path


def test_simulate_then_hull(out):
    assert main(["simulate", "--seed", "3", "--eps", "1e-2", "--out", str(out)]) == 0
    path = out / "path.json"
    assert json.loads(path.read_text())["kind"] == "jump"
    assert main(["hull", "--input", str(path), "--out", str(out)]) == 0
    rows = json.loads((out / "extremal.json").read_text())
    assert rows and set(rows[0][1]) == {"is_jump", "is_T"}
    assert main(["hull", "--input", str(path), "--side", "inferior", "--format", "csv", "--out", str(out)]) == 0
    assert (out / "extremal.csv").read_text().startswith("t,is_jump,is_T")


def test_simulate_is_deterministic(out):
    a, b = out / "a", out / "b"
    main(["simulate", "--kind", "brownian", "--n", "32", "--seed", "1", "--out", str(a)])
    main(["simulate", "--kind", "brownian", "--n", "32", "--seed", "1", "--out", str(b)])
    assert (a / "path.json").read_text() == (b / "path.json").read_text()


def test_drift_and_burgers(out):
    main(["simulate", "--seed", "0", "--eps", "1e-2", "--out", str(out)])
    path = str(out / "path.json")
    assert main(["drift", "--input", path, "--mu", "1.0", "--u", "0.0", "--out", str(out)]) == 0
    rep = json.loads((out / "drift.json").read_text())
    assert "exceeding_times" in rep and rep["isolation"]
    assert main(["drift", "--input", path, "--kind", "quadratic", "--param", "1", "--mu", "1", "--u", "0",
                 "--out", str(out)]) == 2
    assert main(["burgers", "--input", path, "--t", "0.5", "--x", "-1", "2", "11",
                 "--format", "csv", "--out", str(out)]) == 0
    assert (out / "potential.csv").read_text().startswith("x,psi")
    assert (out / "shocks.csv").read_text().startswith("a_left,a_right,x,mass")
    assert main(["burgers", "--input", path, "--t", "-1", "--out", str(out)]) == 2


def test_sticky_subcommand(out):
    assert main(["sticky", "--velocities", "1,0.6,-0.4", "--out", str(out)]) == 0
    assert json.loads((out / "partition.json").read_text()) == [[0, 2]]
    assert main(["sticky", "--n", "12", "--seed", "5", "--out", str(out)]) == 0
    assert json.loads((out / "verify.json").read_text())["agree"] is True


def test_verify_writes_reports_and_sets_status(out, capsys):
    assert main(["verify", "--experiment", "sticky_theorem", "--replicas", "5", "--out", str(out)]) == 0
    assert "PASS sticky_theorem" in capsys.readouterr().out
    rep = json.loads((out / "sticky_theorem.json").read_text())
    assert rep["passed"] and rep["schema_version"] == "1"
    cfg = out / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "sticky_theorem", "replicas": 2,
                               "thresholds": {"agreement_fraction": {"op": ">", "value": 1.0}}}))
    assert main(["verify", "--config", str(cfg), "--format", "csv", "--out", str(out)]) == 1
    assert (out / "sticky_theorem.verdicts.csv").exists()


def test_verify_list_and_errors(out, capsys):
    assert main(["verify", "--list"]) == 0
    assert capsys.readouterr().out.split() == list(EXPERIMENT_IDS)
    assert main(["verify"]) == 2
    bad = out / "bad.json"
    bad.write_text('{"experiment": "sticky_theorem", "replicas": 0}')
    assert main(["verify", "--config", str(bad)]) == 2
    assert main(["hull", "--input", str(out / "missing.json")]) == 2


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("EXTREMAL_HULL_OUT", str(tmp_path / "env"))
    assert main(["sticky", "--velocities", "1,-1"]) == 0
    assert (tmp_path / "env" / "events.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "extremal_hull", "verify", "--list"],
                          capture_output=True, text=True, check=True)
    assert "sticky_theorem" in proc.stdout
