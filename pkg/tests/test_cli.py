import csv
import json
import os
import subprocess
import sys

import pytest

from fnn.cli import EXIT_DATA, EXIT_OK, EXIT_TRAIN, EXIT_USAGE, run, write_atomic
from fnn.dataset import Dataset, write_csv
from fnn.rules import RULE_PATTERN
from fnn.synthetic import make_sqli_like

FAST = ["--b", "3", "--folds", "4"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_csv(d / "data.csv", make_sqli_like(200, seed=5))
    return d


@pytest.fixture(scope="module")
def model_path(workdir):
    out = workdir / "model.json"
    argv = ["train", "--data", str(workdir / "data.csv"), "--label", "Class", "--m", "2", "--rho", "0.6",
            "--seed", "7", "--out", str(out), *FAST]
    assert run(argv) == EXIT_OK
    return out


def test_train_writes_model(model_path):
    doc = json.loads(model_path.read_text())
    assert doc["schema"] == "fnn-model/1" and doc["config"]["seed"] == 7
    assert len(doc["v"]) == len(doc["neurons"]) + 1


def test_train_is_byte_identical(workdir, model_path):
    again = workdir / "again.json"
    argv = ["train", "--data", str(workdir / "data.csv"), "--m", "2", "--rho", "0.6", "--seed", "7",
            "--out", str(again), *FAST]
    assert run(argv) == EXIT_OK
    assert again.read_bytes() == model_path.read_bytes()


def test_seed_env_fallback(workdir, monkeypatch, model_path):
    monkeypatch.setenv("FNN_SEED", "7")
    out = workdir / "env.json"
    assert run(["train", "--data", str(workdir / "data.csv"), "--rho", "0.6", "--out", str(out), *FAST]) == 0
    assert out.read_bytes() == model_path.read_bytes()
    monkeypatch.setenv("FNN_SEED", "seven")
    assert run(["train", "--data", str(workdir / "data.csv"), *FAST]) == EXIT_USAGE


def test_missing_data_file(capsys, tmp_path):
    missing = tmp_path / "missing.csv"
    assert run(["train", "--data", str(missing), "--seed", "1"]) == EXIT_DATA
    assert str(missing) in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["train", "--data", "x.csv", "--bogus"],
    ["frobnicate"],
    [],
    ["train", "--data", "x.csv", "--m", "1"],
    ["train", "--data", "x.csv", "--neuron", "xor"],
    ["benchmark", "--data", "x.csv", "--grid", "paper", "--m", "2"],
    ["benchmark", "--data", "x.csv", "--runs", "0"],
])
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_bad_cell_is_data_error(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("length,entropy,Class\n4,abc,1\n")
    assert run(["train", "--data", str(p)]) == EXIT_DATA
    assert "row 2, column 'entropy'" in capsys.readouterr().err


def test_training_failure_exit_code(tmp_path):
    p = tmp_path / "tiny.csv"
    write_csv(p, Dataset([[0.0], [1.0], [2.0]], [1, -1, 1], ("x",)))
    assert run(["train", "--data", str(p), "--folds", "10"]) == EXIT_TRAIN


def test_predict_rows_and_labels(workdir, model_path):
    out = workdir / "pred.json"
    assert run(["predict", "--model", str(model_path), "--data", str(workdir / "data.csv"), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["predictions"]) == len(doc["scores"]) == 200
    assert set(doc["predictions"]) <= {-1, 1}


def test_evaluate_json_and_text(workdir, model_path, capsys):
    data = str(workdir / "data.csv")
    assert run(["evaluate", "--model", str(model_path), "--data", data]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert {"accuracy", "auc", "sensitivity", "confusion"} <= set(doc)
    assert run(["evaluate", "--model", str(model_path), "--data", data, "--format", "text"]) == 0
    assert capsys.readouterr().out.startswith("Model")


def test_rules_text_grammar_and_json(workdir, model_path, capsys):
    assert run(["rules", "--model", str(model_path), "--format", "text"]) == 0
    lines = capsys.readouterr().out.splitlines()
    n = len(json.loads(model_path.read_text())["neurons"])
    assert len(lines) == n
    assert all(RULE_PATTERN.match(line) for line in lines)
    assert run(["rules", "--model", str(model_path), "--data", str(workdir / "data.csv")]) == 0
    rules = json.loads(capsys.readouterr().out)
    assert len(rules) == n and all("weight" in a for r in rules for a in r["antecedents"])


def test_featurize(tmp_path):
    src = tmp_path / "sql.csv"
    with open(src, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["query", "Class"])
        w.writerow(["aaaa", "0"])
        w.writerow(["SELECT * FROM t WHERE a='1' OR '1'='1'", "1"])
    out = tmp_path / "f.csv"
    assert run(["featurize", "--data", str(src), "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert rows[0] == {"length": "4.0", "entropy": "0.0", "Class": "0"}
    scores = tmp_path / "scores.json"
    scores.write_text(json.dumps({"aaaa": {"malice": 0.1, "confidence": 0.2, "levelDifference": 0}}))
    assert run(["featurize", "--data", str(src), "--scores", str(scores), "--out", str(out)]) == EXIT_DATA


def test_benchmark_custom_grid_deterministic(workdir, capsys):
    outs = []
    for name in ("b1.json", "b2.json"):
        out = workdir / name
        argv = ["benchmark", "--data", str(workdir / "data.csv"), "--grid", "custom", "--m", "2",
                "--b", "2,3", "--rho", "0.6", "--runs", "2", "--folds", "3", "--seed", "11", "--out", str(out)]
        assert run(argv) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    table = capsys.readouterr().out
    assert table.splitlines()[0].split()[:4] == ["Model", "Accuracy", "AUC", "Sensitivity"]
    doc = json.loads(outs[0])
    assert len(doc["grid_search"]["table"]) == 2 and doc["runs"]["runs"] == 2


def test_write_atomic_replaces(tmp_path):
    p = tmp_path / "f.txt"
    p.write_text("old")
    write_atomic(str(p), "new")
    assert p.read_text() == "new"
    assert [f for f in os.listdir(tmp_path) if f.startswith(".fnn-")] == []


def test_module_entry_point(model_path):
    proc = subprocess.run([sys.executable, "-m", "fnn", "rules", "--model", str(model_path), "--format", "text"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("1. If (")
