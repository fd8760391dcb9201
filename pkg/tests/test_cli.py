import json
import os
import subprocess
import sys

import pytest

from missml.cli import main

STATS = {"n": 40, "r": 12, "s": 15, "my1": 0.3, "my2": -0.2, "my11": 1.4, "my12": 0.5, "my22": 1.1,
         "mz1": 0.1, "mz2": 1.2, "mw1": -0.4, "mw2": 0.9}
TABLE = {"t": [[3, 5], [7, 2]], "rvec": [4, 1], "svec": [2, 6]}


@pytest.fixture
def files(tmp_path):
    (tmp_path / "stats.json").write_text(json.dumps(STATS))
    (tmp_path / "table.json").write_text(json.dumps(TABLE))
    (tmp_path / "bad.json").write_text("{not json")
    return tmp_path


def test_mldegree(capsys):
    assert main(["mldegree", "--m", "2", "--n", "4"]) == 0
    assert capsys.readouterr().out.strip() == "29"


def test_mldegree_checks(capsys):
    assert main(["mldegree", "--m", "3", "--n", "3", "--verify-lonesum", "--closed-form-check"]) == 0
    assert "73" in capsys.readouterr().out


def test_solve_json(files, capsys):
    out = files / "report.json"
    assert main(["solve", "--stats", str(files / "stats.json"), "--seed", "7", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["n_complex"] == 9 and doc["report"]["n_relevant_max"] >= 1
    assert doc["config"]["seed"] == 7 and doc["config"]["sat_tol"] == 1e-8
    assert doc["stats"] == STATS


def test_solve_parameter_method(files):
    out = files / "report.json"
    assert main(["solve", "--stats", str(files / "stats.json"), "--seed", "1", "--method", "parameter",
                 "-o", str(out)]) == 0
    assert json.loads(out.read_text())["report"]["n_complex"] == 9


def test_default_seed_is_echoed(files):
    out = files / "report.json"
    assert main(["solve", "--stats", str(files / "stats.json"), "-o", str(out)]) == 0
    assert isinstance(json.loads(out.read_text())["config"]["seed"], int)


def test_simulate_byte_identical(capsys):
    outs = []
    for _ in range(2):
        assert main(["simulate", "--scenario", "nmar", "--trials", "10", "--seed", "1"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["histogram"]["trials"] == 10 and len(doc["records"]) == 10
    assert doc["config"]["jobs"] >= 1


def test_simulate_csv_header(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["simulate", "--scenario", "mcar", "--trials", "2", "--seed", "3", "--format", "csv",
                 "--jobs", "1", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "trial,n_complex,n_real,n_relevant,n_relevant_max,method,error"
    assert len(lines) == 4


def test_em_both_models(files, capsys):
    assert main(["em", "--stats", str(files / "stats.json")]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["converged"]
    trace = files / "trace.csv"
    assert main(["em", "--table", str(files / "table.json"), "--trace-csv", str(trace)]) == 0
    lines = trace.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1].startswith("iteration,loglik,p11,p12,p21,p22")


def test_discrete_commands(files, capsys):
    assert main(["discrete-critical", "--table", str(files / "table.json")]) == 0
    d = json.loads(capsys.readouterr().out)
    assert len(d["points"]) == 5 and sum(p["nonnegative"] for p in d["points"]) == 1
    assert main(["discrete-mle", "--table", str(files / "table.json")]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["converged"] and abs(sum(map(sum, d["p"])) - 1) < 1e-12


def test_count_regions(tmp_path, capsys):
    csv_path = tmp_path / "regions.csv"
    assert main(["count-regions", "--m", "2", "--n", "2", "--cross-check", "--csv", str(csv_path), "--jobs", "1"]) == 0
    assert "5" in capsys.readouterr().out
    assert csv_path.read_text().splitlines()[1].startswith("index,signs,status,combinatorial,witness")


@pytest.mark.parametrize("argv", [
    ["solve"],
    ["solve", "--stats", "/nonexistent.json"],
    ["mldegree", "--m", "0", "--n", "2"],
    ["count-regions", "--m", "4", "--n", "4"],
    ["simulate", "--scenario", "bogus"],
    ["frobnicate"],
    ["mldegree", "--m", "2", "--n", "2", "--bogus-flag"],
])
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_malformed_json_leaves_no_output(files):
    out = files / "never.json"
    assert main(["solve", "--stats", str(files / "bad.json"), "-o", str(out)]) == 2
    assert not out.exists()
    assert [p.name for p in files.iterdir() if p.name.startswith(".tmp-")] == []


def test_solver_hard_error_exit_3(files, capsys):
    out = files / "mle.json"
    code = main(["discrete-mle", "--table", str(files / "table.json"), "--max-iter", "1", "-o", str(out)])
    assert code == 3
    assert not out.exists()


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "missml.cli", "mldegree", "--m", "2", "--n", "3"],
                         capture_output=True, text=True, env=dict(os.environ))
    assert res.returncode == 0 and res.stdout.strip() == "13"
