import json
import subprocess
import sys

import pytest

from brdsim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exact_q0(capsys):
    code, out, _ = run(capsys, "exact", "--ka", "2", "--kb", "2")
    data = json.loads(out)
    assert code == 0
    assert data["q"][0] == pytest.approx(1 / 3)
    assert set(data) >= {"k_a", "k_b", "q", "survival", "mean", "variance", "limit"}
    assert data["limit"]["mean_limit"] == pytest.approx(1.718281828459045)


def test_exact_csv(capsys):
    code, out, _ = run(capsys, "exact", "--ka", "3", "--kb", "3", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,q,survival,pmf" and len(lines) == 7


def test_brd_potential_converges_and_logs_seed(capsys):
    code, out, err = run(capsys, "brd", "--ka", "4", "--kb", "4", "--p", "1", "--seed", "7")
    assert code == 0
    assert json.loads(out)["outcome"] == "ConvergedToPne"
    assert "seed=7" in err


def test_count_one_by_one(capsys):
    code, out, _ = run(capsys, "count", "--ka", "1", "--kb", "1", "--p", "0", "--seed", "1")
    assert code == 0
    assert json.loads(out) == {"count": 1, "equilibria": [[1, 1]]}


def test_round_trip_through_files(tmp_path, capsys):
    args = ["--ka", "6", "--kb", "5", "--p", "0.4", "--seed", "1234"]
    assert run(capsys, "gen", *args, "--out", str(tmp_path / "g"))[0] == 0
    _, mem_count, _ = run(capsys, "count", *args)
    _, file_count, _ = run(capsys, "count", "--game", str(tmp_path / "g.csv"))
    assert json.loads(mem_count) == json.loads(file_count)
    _, mem_brd, _ = run(capsys, "brd", *args)
    _, file_brd, _ = run(capsys, "brd", "--game", str(tmp_path / "g"))
    assert json.loads(mem_brd) == json.loads(file_brd)
    # the single-file JSON form reads back the same way
    run(capsys, "gen", *args, "--format", "json", "--out", str(tmp_path / "one.json"))
    assert json.loads(run(capsys, "count", "--game", str(tmp_path / "one.json"))[1]) == json.loads(mem_count)


def test_brd_trace_outputs(tmp_path, capsys):
    args = ["brd", "--ka", "5", "--kb", "5", "--p", "0", "--seed", "3"]
    code, _, _ = run(capsys, *args, "--trace", str(tmp_path / "t.jsonl"), "--out", str(tmp_path / "o.json"))
    assert code == 0
    steps = [json.loads(x) for x in (tmp_path / "t.jsonl").read_text().splitlines()]
    assert steps[0] == {"t": 0, "a": 1, "b": 1, "mover": "None", "moved": False}
    summary = json.loads((tmp_path / "o.json").read_text())
    assert set(summary) >= {"outcome", "tau_ne", "tau_r", "tau_cycle", "reveals_total"}
    _, out, _ = run(capsys, *args, "--format", "jsonl")
    assert [json.loads(x) for x in out.splitlines()] == steps


def test_gen_csv_to_stdout(capsys):
    code, out, _ = run(capsys, "gen", "--ka", "2", "--kb", "3", "--p", "0.5", "--seed", "1")
    assert code == 0 and out.splitlines()[0] == "a,b,u_a,u_b" and len(out.splitlines()) == 7


def test_count_csv(capsys):
    code, out, _ = run(capsys, "count", "--ka", "1", "--kb", "1", "--p", "0", "--seed", "1", "--format", "csv")
    assert out == "a,b\n1,1\n"


def test_sweep(tmp_path, capsys):
    spec = tmp_path / "spec.toml"
    spec.write_text('trials = 50\nmetrics = ["converged", "pne_count"]\ngrid = [[4, 4, 0.5], [3, 5, 1.0]]\n')
    code, _, err = run(capsys, "sweep", "--spec", str(spec), "--seed", "5", "--trials", "80",
                       "--threads", "2", "--out", str(tmp_path / "out"))
    assert code == 0 and "base_seed=5" in err
    data = json.loads((tmp_path / "out.json").read_text())
    assert data["spec"]["base_seed"] == 5 and data["points"][1]["n_trials"] == 80
    assert (tmp_path / "out.csv").read_text().startswith("grid_index,")
    code, out, err = run(capsys, "sweep", "--spec", str(spec))
    assert code == 0 and "base_seed=0" in err and json.loads(out)["spec"]["trials"] == 50


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["gen", "--ka", "2", "--kb", "2", "--p", "0.5"],  # seed is mandatory
    ["brd", "--ka", "2"],
    ["count", "--ka", "2", "--kb", "2", "--p", "7", "--seed", "1"],
    ["brd", "--ka", "2", "--kb", "2", "--p", "0.5", "--seed", "1", "--game", "x"],
    ["exact", "--ka", "two", "--kb", "2"],
    ["gen", "--ka", "2", "--kb", "2", "--p", "0.5", "--seed", "1", "--format", "yaml"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "usage" in err


def test_runtime_errors(tmp_path, capsys):
    code, _, err = run(capsys, "count", "--game", str(tmp_path / "missing"))
    assert code == 1 and "FileNotFoundError" in err
    bad = tmp_path / "spec.json"
    bad.write_text("{not json")
    assert run(capsys, "sweep", "--spec", str(bad))[0] == 1


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "brdsim", "exact", "--ka", "1", "--kb", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["q"] == [1.0]
