"""Metrics, CV grid search and the repeated-split benchmark protocol."""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .dataset import Dataset, derive_seed, kfold_indices, stratified_split_indices
from .network import ModelConfig, predict_batch, score_batch, train, train_family

log = logging.getLogger(__name__)

DEFAULT_GRID = {"M": (2, 3, 4), "b": (8, 16, 32), "rho": (0.5, 0.6, 0.7)}
METRIC_COLUMNS = ("accuracy", "auc", "sensitivity", "test_ms")
TABLE_HEADER = ("Model", "Accuracy", "AUC", "Sensitivity", "Test Time")


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    auc: float
    sensitivity: float
    confusion: tuple  # (tp, fp, tn, fn)
    train_seconds: float = 0.0
    test_seconds: float = 0.0
    flags: tuple = ()

    def to_dict(self, include_timings: bool = True) -> dict:
        d = asdict(self)
        d["confusion"] = dict(zip(("tp", "fp", "tn", "fn"), self.confusion))
        d["flags"] = list(self.flags)
        if not include_timings:
            del d["train_seconds"], d["test_seconds"]
        return d


def auc_rank(labels, scores) -> float:
    """Mann-Whitney AUC with midranks for ties."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one sample of each class")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def compute_metrics(labels, predictions, scores, train_seconds: float = 0.0, test_seconds: float = 0.0) -> Metrics:
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    scores = np.asarray(scores, dtype=float)
    if not (labels.shape == predictions.shape == scores.shape):
        raise ValueError("labels, predictions and scores must have equal length")
    if labels.size == 0:
        raise ValueError("no samples to evaluate")
    tp = int(np.sum((labels == 1) & (predictions == 1)))
    fp = int(np.sum((labels == -1) & (predictions == 1)))
    tn = int(np.sum((labels == -1) & (predictions == -1)))
    fn = int(np.sum((labels == 1) & (predictions == -1)))
    flags = []
    if tp + fn:
        sens = tp / (tp + fn)
    else:
        sens = 0.0
        flags.append("no positives: sensitivity undefined")
    try:
        auc = auc_rank(labels, scores)
    except ValueError:
        auc = 0.5
        flags.append("single class: auc undefined")
    return Metrics((tp + tn) / labels.size, auc, sens, (tp, fp, tn, fn), train_seconds, test_seconds, tuple(flags))


def evaluate_model(model, data: Dataset, train_seconds: float = 0.0) -> Metrics:
    t0 = time.perf_counter()
    scores = score_batch(model, data.X)
    preds = np.where(scores >= 0, 1, -1)
    elapsed = time.perf_counter() - t0
    return compute_metrics(data.y, preds, scores, train_seconds, elapsed)


@dataclass
class GridResult:
    best: ModelConfig
    best_score: float
    table: list

    def to_dict(self) -> dict:
        return {"best": self.best.to_dict(), "best_cv_accuracy": self.best_score, "table": self.table}


def _grid_key(row) -> tuple:
    # higher accuracy first; then smaller M, smaller b, larger rho
    return (-row["cv_accuracy"], row["M"], row["b"], -row["rho"])


def grid_search(
    data: Dataset,
    grid: Optional[dict] = None,
    base_config: Optional[ModelConfig] = None,
    seed: int = 0,
    folds: int = 10,
) -> GridResult:
    """Mean k-fold CV accuracy for every (M, b, rho) combination.

    Cells sharing ``M`` reuse one set of bootstrap replications per fold;
    each cell's model is identical to a direct ``train`` with that config.
    """
    grid = dict(DEFAULT_GRID if grid is None else grid)
    base_config = base_config or ModelConfig()
    Ms, bs, rhos = sorted(set(grid["M"])), sorted(set(grid["b"])), sorted(set(grid["rho"]))
    if not (Ms and bs and rhos):
        raise ValueError("grid sets must be non-empty")
    fold_sets = kfold_indices(len(data), folds, seed)
    all_idx = np.arange(len(data))
    settings = list(itertools.product(bs, rhos))
    acc = {(M, b, r): [] for M in Ms for b, r in settings}
    errors: dict = {}
    for M in Ms:
        cfg = replace(base_config, M=M, seed=derive_seed(seed, M))
        for fi, held in enumerate(fold_sets):
            train_idx = np.setdiff1d(all_idx, held, assume_unique=True)
            tr, te = data.subset(train_idx), data.subset(held)
            try:
                models = train_family(tr, cfg, settings)
            except Exception as exc:  # recorded per cell, never fatal
                log.warning("grid cell M=%d fold %d failed: %s", M, fi, exc)
                for b, r in settings:
                    errors.setdefault((M, b, r), f"{type(exc).__name__}: {exc}")
                continue
            for (b, r), model in models.items():
                acc[(M, b, r)].append(float(np.mean(predict_batch(model, te.X) == te.y)))
    table = []
    for (M, b, r), vals in acc.items():
        err = errors.get((M, b, r))
        row = {"M": M, "b": b, "rho": r, "seed": derive_seed(seed, M),
               "cv_accuracy": float(np.mean(vals)) if vals and not err else float("nan"),
               "folds_completed": len(vals), "error": err}
        table.append(row)
    valid = [row for row in table if not math.isnan(row["cv_accuracy"])]
    if not valid:
        raise RuntimeError("every grid cell failed to train")
    best_row = min(valid, key=_grid_key)
    best = replace(base_config, M=best_row["M"], b=best_row["b"], rho=best_row["rho"])
    return GridResult(best, best_row["cv_accuracy"], table)


@dataclass
class RunReport:
    per_run: list
    configs: list
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = summarize(self.per_run)

    def to_dict(self, include_timings: bool = False) -> dict:
        summary = {k: v for k, v in self.summary.items() if include_timings or not k.endswith("_ms")}
        return {
            "runs": len(self.per_run),
            "summary": summary,
            "per_run": [m.to_dict(include_timings) for m in self.per_run],
            "configs": self.configs,
        }


def _metric_values(m: Metrics) -> dict:
    return {
        "accuracy": 100.0 * m.accuracy,
        "auc": 100.0 * m.auc,
        "sensitivity": 100.0 * m.sensitivity,
        "test_ms": 1000.0 * m.test_seconds,
        "train_ms": 1000.0 * m.train_seconds,
    }


def summarize(per_run: Sequence[Metrics]) -> dict:
    """Mean and sample std (percent / milliseconds) per metric."""
    rows = [_metric_values(m) for m in per_run]
    out = {}
    for key in rows[0] if rows else ():
        vals = np.array([r[key] for r in rows])
        std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        out[key] = {"mean": float(vals.mean()), "std": std}
    return out


def format_cell(mean: float, std: float) -> str:
    return f"{mean:.2f}({std:.2f})"


def repeated_runs(data: Dataset, config: ModelConfig, R: int = 30, seed: int = 0,
                  train_fraction: float = 0.7) -> RunReport:
    """R fresh stratified splits; train on one part, evaluate on the other."""
    if R < 1:
        raise ValueError("R must be at least 1")
    per_run, configs = [], []
    for r in range(R):
        tr_idx, te_idx = stratified_split_indices(data.y, train_fraction, derive_seed(seed, r))
        cfg = replace(config, seed=derive_seed(seed, r, 1))
        t0 = time.perf_counter()
        model = train(data.subset(tr_idx), cfg)
        train_s = time.perf_counter() - t0
        per_run.append(evaluate_model(model, data.subset(te_idx), train_s))
        configs.append(dict(cfg.to_dict(), L_s=model.report["L_s"]))
    return RunReport(per_run, configs)


def render_table(rows: Sequence[tuple[str, dict]]) -> str:
    """Fixed-width table in the column order Model/Accuracy/AUC/Sensitivity/Test Time."""
    lines = [TABLE_HEADER]
    for name, summary in rows:
        lines.append((name, *(format_cell(summary[c]["mean"], summary[c]["std"]) for c in METRIC_COLUMNS)))
    widths = [max(len(r[i]) for r in lines) for i in range(len(TABLE_HEADER))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in lines) + "\n"


def benchmark(data: Dataset, grid: Optional[dict] = None, base_config: Optional[ModelConfig] = None,
              runs: int = 30, seed: int = 0, train_fraction: float = 0.7, folds: int = 10) -> dict:
    """Full protocol: grid search by k-fold CV inside a training split, then ``runs`` repeated splits."""
    base_config = base_config or ModelConfig()
    tr_idx, _ = stratified_split_indices(data.y, train_fraction, derive_seed(seed, 0xB00))
    t0 = time.perf_counter()
    gres = grid_search(data.subset(tr_idx), grid, base_config, derive_seed(seed, 0x6A1D), folds)
    grid_s = time.perf_counter() - t0
    report = repeated_runs(data, gres.best, runs, derive_seed(seed, 0x5E7), train_fraction)
    label = gres.best.neuron_kind.value.upper()
    return {
        "grid": gres,
        "runs": report,
        "label": label,
        "grid_seconds": grid_s,
        "table": render_table([(label, report.summary)]),
    }


def benchmark_json(result: dict, *, seed: int, data_path: Optional[str] = None) -> dict:
    """Deterministic JSON view of a benchmark result (wall-clock figures omitted)."""
    return {
        "schema": "fnn-benchmark/1",
        "seed": seed,
        "data": data_path,
        "model": result["label"],
        "grid_search": result["grid"].to_dict(),
        "runs": result["runs"].to_dict(include_timings=False),
        "table_columns": list(TABLE_HEADER),
    }
