import json
import shutil
import subprocess

import pytest

from trailblazer import save_mdp
from trailblazer.bench import read_report
from trailblazer.cli import main
from trailblazer.instances import gap_mdp, two_action_mix


@pytest.fixture
def mdp_file(tmp_path):
    path = tmp_path / "mdp.json"
    save_mdp(two_action_mix(), path)
    return path


def test_plan_prints_record(mdp_file, capsys):
    assert main(["plan", "--mdp", str(mdp_file), "--eps", "1.5", "--seed", "3"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["seed"] == 3 and rec["oracle_calls"] > 0
    assert abs(rec["estimate"] - rec["truth"]) <= 1.5


def test_plan_random_and_out(tmp_path):
    out = tmp_path / "r.json"
    assert main(["plan", "--random", "1,2,2,4", "--eps", "2.0", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["epsilon"] == 2.0


def test_plan_toy(capsys):
    assert main(["plan", "--toy", "bounded_gap:0.3", "--eps", "3.0"]) == 0
    assert json.loads(capsys.readouterr().out)["success"] is True


def test_bench_report_deterministic(tmp_path, mdp_file, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bench", "--mdp", str(mdp_file), "--eps", "2.0,1.5", "--trials", "3"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(read_report(a)) == 6
    assert "failures=" in capsys.readouterr().err


def test_bench_json_format(tmp_path, mdp_file):
    out = tmp_path / "a.json"
    assert main(["bench", "--mdp", str(mdp_file), "--eps", "2.0", "--trials", "2",
                 "--format", "json", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())) == 2


def test_bench_sparse_planner(tmp_path, mdp_file):
    out = tmp_path / "s.csv"
    assert main(["bench", "--mdp", str(mdp_file), "--planner", "sparse", "--width", "4", "--horizon", "2",
                 "--eps", "0.5", "--trials", "2", "--out", str(out)]) == 0


def test_budget_exit_code(tmp_path, mdp_file):
    out = tmp_path / "c.csv"
    assert main(["bench", "--mdp", str(mdp_file), "--eps", "1.0", "--trials", "1", "--cap", "100",
                 "--out", str(out)]) == 3
    assert read_report(out)[0]["estimate"] is None
    assert main(["plan", "--mdp", str(mdp_file), "--eps", "1.0", "--cap", "100"]) == 3


@pytest.mark.parametrize("argv", [
    ["plan", "--eps", "0.5"],
    ["plan", "--random", "1,2,9,3", "--eps", "0.5"],
    ["plan", "--random", "x", "--eps", "0.5"],
    ["plan", "--toy", "nope:1", "--eps", "0.5"],
    ["plan", "--random", "1,2,2,4", "--eps", "-1"],
    ["plan", "--mdp", "/nonexistent/file.json", "--eps", "0.5"],
    ["bench", "--random", "1,2,2,4", "--eps", "0.5", "--trials", "0", "--out", "/tmp/never.csv"],
])
def test_validation_exit_code(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_mdp_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"gamma": 1.0, "states": []}))
    assert main(["plan", "--mdp", str(bad), "--eps", "0.5"]) == 2
    assert "gamma" in capsys.readouterr().err


def test_fit_subcommand(tmp_path, capsys):
    report = tmp_path / "g.csv"
    mdp = tmp_path / "gap.json"
    save_mdp(gap_mdp(), mdp)
    assert main(["bench", "--mdp", str(mdp), "--eps", "2.0,1.5,1.2,1.0", "--trials", "1",
                 "--out", str(report)]) == 0
    capsys.readouterr()
    assert main(["fit", str(report)]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["n_points"] == 4 and "slope" in fit


def test_fit_missing_report(capsys):
    assert main(["fit", "/nonexistent.csv"]) == 2


def test_analyze(tmp_path, capsys):
    mdp = tmp_path / "gap.json"
    save_mdp(gap_mdp(), mdp)
    assert main(["analyze", "--mdp", str(mdp), "--hcap", "3", "--hgrid", "2,4", "--samples", "100"]) == 0
    data = json.loads(capsys.readouterr().out)
    # the second root action loses 0.6 > theta(2) = 0.5
    assert data["sizes"] == [1, 1, 1]


@pytest.mark.skipif(shutil.which("trailblazer") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(["trailblazer", "plan", "--random", "1,1,1,3", "--eps", "2.0"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["oracle_calls"] >= 0
