"""Gaussian fuzzy partitions of the input space (first network layer)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# sigma at which two Gaussians spaced `d` apart cross at membership 0.5
HALF_MAX_DIVISOR = math.sqrt(8.0 * math.log(2.0))


@dataclass(frozen=True)
class GaussianMF:
    center: float
    sigma: float
    label: str

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def __call__(self, x):
        return eval_mf(self, x)


@dataclass(frozen=True)
class FuzzyPartition:
    per_feature: tuple[tuple[GaussianMF, ...], ...]

    def __post_init__(self):
        sizes = {len(mfs) for mfs in self.per_feature}
        if len(sizes) > 1:
            raise ValueError("every feature must have the same number of membership functions")

    @property
    def n_features(self) -> int:
        return len(self.per_feature)

    @property
    def n_sets(self) -> int:
        return len(self.per_feature[0]) if self.per_feature else 0

    def centers(self) -> np.ndarray:
        return np.array([[mf.center for mf in mfs] for mfs in self.per_feature])

    def sigmas(self) -> np.ndarray:
        return np.array([[mf.sigma for mf in mfs] for mfs in self.per_feature])

    def to_list(self) -> list:
        return [
            [{"center": mf.center, "sigma": mf.sigma, "label": mf.label} for mf in mfs]
            for mfs in self.per_feature
        ]

    @classmethod
    def from_list(cls, data: Sequence) -> "FuzzyPartition":
        return cls(
            tuple(
                tuple(GaussianMF(float(d["center"]), float(d["sigma"]), str(d["label"])) for d in mfs)
                for mfs in data
            )
        )


def linguistic_labels(M: int) -> list[str]:
    if M == 2:
        return ["low", "high"]
    if M == 3:
        return ["low", "medium", "high"]
    return [f"level{m + 1}" for m in range(M)]


def eval_mf(mf: GaussianMF, x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-((x - mf.center) ** 2) / (2.0 * mf.sigma**2))
    return float(out) if out.ndim == 0 else out


def build_partition(X, M: int) -> FuzzyPartition:
    """Equally spaced Gaussian sets over each feature's observed [min, max].

    ``X`` is a (standardized) feature matrix or a ``Dataset``.
    """
    if M < 2:
        raise ValueError(f"M must be at least 2, got {M}")
    X = np.asarray(getattr(X, "X", X), dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty two-dimensional feature matrix")
    labels = linguistic_labels(M)
    features = []
    for j in range(X.shape[1]):
        lo, hi = float(X[:, j].min()), float(X[:, j].max())
        if hi > lo:
            centers = np.linspace(lo, hi, M)
            sigma = (hi - lo) / (M - 1) / HALF_MAX_DIVISOR
            mfs = tuple(GaussianMF(float(c), sigma, lab) for c, lab in zip(centers, labels))
        else:
            warnings.warn(f"feature {j} is constant; its fuzzy sets collapse onto {lo}", stacklevel=2)
            mfs = tuple(GaussianMF(lo, 1.0, lab) for lab in labels)
        features.append(mfs)
    return FuzzyPartition(tuple(features))


def fuzzify(partition: FuzzyPartition, x) -> np.ndarray:
    """Membership degrees of one sample (N x M) or a batch (K x N x M)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != partition.n_features:
        raise ValueError(f"expected {partition.n_features} features, got {x.shape[-1]}")
    c = partition.centers()
    s = partition.sigmas()
    return np.exp(-((x[..., None] - c) ** 2) / (2.0 * s**2))
