import itertools
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fnn.evaluation import (
    DEFAULT_GRID,
    TABLE_HEADER,
    auc_rank,
    benchmark,
    benchmark_json,
    compute_metrics,
    format_cell,
    grid_search,
    render_table,
    repeated_runs,
    summarize,
)
from fnn.network import ModelConfig
from fnn.synthetic import make_sqli_like

SMALL = ModelConfig(cv_folds=3)


def pairwise_auc(labels, scores):
    pos = scores[labels == 1]
    neg = scores[labels == -1]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return wins / (pos.size * neg.size)


def test_auc_examples():
    assert auc_rank([1, 1, -1], [0.9, 0.4, 0.6]) == 0.5
    assert auc_rank([1, -1, 1, -1], [3, 1, 4, 2]) == 1.0
    assert auc_rank([1, -1, 1], [0.2, 0.2, 0.2]) == 0.5
    with pytest.raises(ValueError):
        auc_rank([1, 1], [0.1, 0.2])
    with pytest.raises(ValueError):
        auc_rank([1, -1], [0.1])


@settings(max_examples=200)
@given(st.lists(st.tuples(st.sampled_from([-1, 1]), st.integers(-5, 5)), min_size=2, max_size=40))
def test_auc_matches_pairwise_oracle(pairs):
    labels = np.array([p[0] for p in pairs])
    scores = np.array([p[1] for p in pairs], dtype=float)
    if np.unique(labels).size < 2:
        return
    assert auc_rank(labels, scores) == pytest.approx(pairwise_auc(labels, scores), abs=1e-12)


def test_auc_invariant_under_increasing_transforms():
    rng = np.random.default_rng(0)
    for _ in range(50):
        labels = rng.choice([-1, 1], 30)
        labels[:2] = (-1, 1)
        z = rng.normal(size=30)
        base = auc_rank(labels, z)
        assert auc_rank(labels, 2 * z + 1) == base
        assert auc_rank(labels, z**3) == base


def test_metrics_arithmetic():
    y = np.array([1, 1, 1, -1])
    m = compute_metrics(y, np.ones(4, dtype=int), np.ones(4))
    assert m.accuracy == 0.75 and m.sensitivity == 1.0 and m.confusion == (3, 1, 0, 0)
    perfect = compute_metrics(y, y, y.astype(float))
    assert perfect.accuracy == 1.0 and perfect.auc == 1.0
    with pytest.raises(ValueError):
        compute_metrics(y, y[:3], y)


def test_metrics_flags_missing_positives():
    m = compute_metrics([-1, -1], [-1, 1], [0.0, 1.0])
    assert m.sensitivity == 0.0 and m.flags


@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=60))
def test_majority_predictor_accuracy_and_confusion(labels):
    y = np.array(labels)
    major = 1 if (y == 1).sum() >= (y == -1).sum() else -1
    m = compute_metrics(y, np.full(y.size, major), np.zeros(y.size))
    assert m.accuracy == np.mean(y == major)
    assert sum(m.confusion) == y.size


def test_format_cell_shape():
    assert format_cell(98.44, 0.15) == "98.44(0.15)"
    assert re.fullmatch(r"\d+\.\d{2}\(\d+\.\d{2}\)", format_cell(7.0, 0.0))


@pytest.fixture(scope="module")
def data():
    return make_sqli_like(150, seed=4)


def test_singleton_grid(data):
    res = grid_search(data, {"M": (2,), "b": (4,), "rho": (0.5,)}, SMALL, seed=1, folds=3)
    assert (res.best.M, res.best.b, res.best.rho) == (2, 4, 0.5)
    assert len(res.table) == 1 and res.best_score == res.table[0]["cv_accuracy"]


def test_full_grid_has_27_cells_and_is_reproducible(data):
    a = grid_search(data, DEFAULT_GRID, SMALL, seed=2, folds=3)
    b = grid_search(data, DEFAULT_GRID, SMALL, seed=2, folds=3)
    assert len(a.table) == 27
    assert a.table == b.table and a.best == b.best
    assert all(a.best_score >= row["cv_accuracy"] for row in a.table)


def test_grid_rejects_empty_sets(data):
    with pytest.raises(ValueError):
        grid_search(data, {"M": (), "b": (4,), "rho": (0.5,)}, SMALL)


def test_repeated_runs_summary(data):
    cfg = ModelConfig(b=2, cv_folds=3)
    one = repeated_runs(data, cfg, R=1, seed=0)
    assert all(v["std"] == 0.0 for v in one.summary.values())
    rep = repeated_runs(data, cfg, R=4, seed=0)
    acc = np.array([100 * m.accuracy for m in rep.per_run])
    assert rep.summary["accuracy"]["mean"] == pytest.approx(acc.mean(), abs=1e-9)
    assert rep.summary["accuracy"]["std"] == pytest.approx(acc.std(ddof=1), abs=1e-9)
    assert len({c["seed"] for c in rep.configs}) == 4
    with pytest.raises(ValueError):
        repeated_runs(data, cfg, R=0)


def test_summarize_matches_recomputation():
    ms = [compute_metrics([1, -1, 1], p, np.array(p, float)) for p in ([1, -1, 1], [1, 1, 1], [-1, -1, 1])]
    s = summarize(ms)
    sens = np.array([100.0, 100.0, 50.0])
    assert s["sensitivity"]["mean"] == pytest.approx(sens.mean())
    assert s["sensitivity"]["std"] == pytest.approx(sens.std(ddof=1))


def test_render_table_columns():
    summary = {c: {"mean": 1.0, "std": 0.5} for c in ("accuracy", "auc", "sensitivity", "test_ms")}
    lines = render_table([("UNI", summary)]).splitlines()
    assert lines[0].split() == ["Model", "Accuracy", "AUC", "Sensitivity", "Test", "Time"]
    assert lines[1].split() == ["UNI"] + ["1.00(0.50)"] * 4
    assert len(TABLE_HEADER) == 5


def test_benchmark_json_is_deterministic(data):
    grid = {"M": (2,), "b": (2,), "rho": (0.5, 0.7)}
    a = benchmark(data, grid, SMALL, runs=2, seed=3, folds=3)
    b = benchmark(data, grid, SMALL, runs=2, seed=3, folds=3)
    assert benchmark_json(a, seed=3) == benchmark_json(b, seed=3)
    assert a["table"].startswith("Model")
