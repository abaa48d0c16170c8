"""Loading, featurizing, normalizing, splitting and resampling labeled data."""

from __future__ import annotations

import csv
import math
import os
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

SQLI_FEATURES = ("length", "entropy", "malice", "confidence", "levelDifference")
SCORED_FEATURES = ("malice", "confidence", "levelDifference")


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministically derive an independent 32-bit seed from ``seed`` and integer keys."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class StandardizationStats:
    means: np.ndarray
    stddevs: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.means.shape[0]:
            raise DataError(
                f"expected {self.means.shape[0]} features, got {X.shape[-1]}"
            )
        return (X - self.means) / self.stddevs

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stddevs": self.stddevs.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "StandardizationStats":
        return cls(np.asarray(d["means"], dtype=float), np.asarray(d["stddevs"], dtype=float))


@dataclass(frozen=True)
class Dataset:
    """Feature matrix ``X`` (K x N), labels ``y`` in {-1, +1}.

    ``stats`` is set when ``X`` already holds standardized values.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    stats: Optional[StandardizationStats] = field(default=None)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2:
            raise DataError("feature matrix must be two-dimensional")
        if y.shape != (X.shape[0],):
            raise DataError("label vector length must equal the number of samples")
        if X.shape[1] != len(self.feature_names):
            raise DataError("feature_names length must equal the number of features")
        if y.size and not np.all(np.isin(y, (-1, 1))):
            raise DataError("labels must be -1 or +1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return replace(self, X=self.X[idx], y=self.y[idx])


def _map_label(raw: str, row: int, column: str) -> int:
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"row {row}, column {column!r}: label {raw!r} is not numeric") from None
    if value == 1:
        return 1
    if value in (0, -1):
        return -1
    raise DataError(f"row {row}, column {column!r}: label {raw!r} not in {{0,1}} or {{-1,+1}}")


def load_csv(path, label_column: str = "Class") -> Dataset:
    """Read a header-first CSV; every non-label column is a real-valued feature.

    Row numbers in error messages count the header as row 1.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found in header {header}")
        li = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != li]
        rows, labels = [], []
        for rownum, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}: row {rownum} has {len(rec)} cells, expected {len(header)}")
            feats = []
            for i, cell in enumerate(rec):
                if i == li:
                    continue
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {rownum}, column {header[i]!r}: cannot parse {cell!r} as a number"
                    ) from None
            rows.append(feats)
            labels.append(_map_label(rec[li].strip(), rownum, label_column))
    if not rows:
        raise DataError(f"{path}: dataset has no samples")
    return Dataset(np.array(rows, dtype=float), np.array(labels, dtype=int), tuple(names))


def load_features_csv(path, feature_names: Sequence[str]) -> np.ndarray:
    """Read only the named feature columns (label column optional) for scoring."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        missing = [n for n in feature_names if n not in header]
        if missing:
            raise DataError(f"{path}: missing feature columns {missing}")
        cols = [header.index(n) for n in feature_names]
        rows = []
        for rownum, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                rows.append([float(rec[c]) for c in cols])
            except (ValueError, IndexError):
                raise DataError(f"{path}: row {rownum} has a missing or non-numeric feature cell") from None
    if not rows:
        raise DataError(f"{path}: dataset has no samples")
    return np.array(rows, dtype=float)


def write_csv(path, data: Dataset, label_column: str = "Class") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*data.feature_names, label_column])
        for row, label in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in row] + [1 if label == 1 else 0])


def shannon_entropy(text: str, base: float = 2.0) -> float:
    """Entropy of the character distribution of ``text`` (case-sensitive)."""
    if not text:
        return 0.0
    n = len(text)
    h = 0.0
    for count in Counter(text).values():
        p = count / n
        h -= p * math.log(p)
    return h / math.log(base) if h else 0.0


def featurize_sql(
    statements: Sequence[str],
    scorer: Optional[Mapping[str, Mapping[str, float]]] = None,
    *,
    require_scores: bool = False,
    entropy_base: float = 2.0,
) -> list[dict]:
    """Compute per-statement feature rows.

    ``length`` and ``entropy`` are derived from the text.  The scored columns
    (malice, confidence, levelDifference) come from ``scorer`` keyed by
    statement text; absent scores are reported as ``None`` unless
    ``require_scores`` is set, in which case a missing entry raises.
    """
    if not statements:
        raise DataError("no statements to featurize")
    rows = []
    for s in statements:
        row: dict = {"length": float(len(s)), "entropy": shannon_entropy(s, entropy_base)}
        scores = scorer.get(s) if scorer is not None else None
        if scores is None and require_scores:
            raise DataError(f"score table has no entry for statement {s!r}")
        for name in SCORED_FEATURES:
            row[name] = None if scores is None else float(scores[name])
        rows.append(row)
    return rows


def standardize(data: Dataset) -> tuple[Dataset, StandardizationStats]:
    """Z-score each column; constant columns keep stddev 1 and map to zeros."""
    if len(data) == 0:
        raise DataError("cannot standardize an empty dataset")
    means = data.X.mean(axis=0)
    std = data.X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    stats = StandardizationStats(means, std)
    Xs = stats.apply(data.X)
    # constant columns are exactly mean-valued; force exact zeros
    Xs[:, data.X.std(axis=0) == 0] = 0.0
    return replace(data, X=Xs, stats=stats), stats


def stratified_split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    idx_train, idx_test = stratified_split_indices(data.y, train_fraction, seed)
    return data.subset(idx_train), data.subset(idx_test)


def stratified_split_indices(y, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < train_fraction < 1:
        raise DataError("train_fraction must lie strictly between 0 and 1")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (-1, 1):
        members = np.flatnonzero(y == cls)
        if members.size < 2:
            raise DataError(f"class {cls:+d} has {members.size} sample(s); need at least 2 to split")
        members = rng.permutation(members)
        n_train = int(round(train_fraction * members.size))
        n_train = min(max(n_train, 1), members.size - 1)
        train.append(members[:n_train])
        test.append(members[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def kfold_indices(size: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffle ``range(size)`` and cut it into ``k`` folds whose sizes differ by at most one."""
    if k < 2:
        raise DataError("k must be at least 2")
    if k > size:
        raise DataError(f"cannot split {size} samples into {k} folds")
    perm = np.random.default_rng(seed).permutation(size)
    return [np.sort(f) for f in np.array_split(perm, k)]


def bootstrap_resample(size: int, seed: int) -> np.ndarray:
    if size < 1:
        raise DataError("bootstrap size must be at least 1")
    return np.random.default_rng(seed).integers(0, size, size=size)
