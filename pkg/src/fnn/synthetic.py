"""Synthetic data in the five-feature SQL-injection schema."""

from __future__ import annotations

import numpy as np

from .dataset import SQLI_FEATURES, Dataset


def make_sqli_like(n: int = 2000, positive_rate: float = 0.92, seed: int = 0, margin: float = 0.3) -> Dataset:
    """Labels follow a planted fuzzy rule with a margin.

    A statement is legitimate (-1) iff *malice is low and confidence is low*:
    legitimate samples draw both scores from [0, 0.5 - margin/2], attacks
    draw at least one of them from [0.5 + margin/2, 1].  ``length``,
    ``entropy`` and ``levelDifference`` are weakly informative nuisance
    columns.  Scores live on [0, 1]; length is a character count.
    """
    if not 0 < positive_rate < 1:
        raise ValueError("positive_rate must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    n_pos = int(round(n * positive_rate))
    n_neg = n - n_pos
    lo_hi = 0.5 - margin / 2
    hi_lo = 0.5 + margin / 2

    neg_scores = rng.uniform(0.0, lo_hi, size=(n_neg, 2))
    pos_scores = rng.uniform(0.0, 1.0, size=(n_pos, 2))
    # force at least one score above the margin
    which = rng.integers(0, 2, size=n_pos)
    pos_scores[np.arange(n_pos), which] = rng.uniform(hi_lo, 1.0, size=n_pos)

    scores = np.vstack([neg_scores, pos_scores])
    y = np.concatenate([-np.ones(n_neg, dtype=int), np.ones(n_pos, dtype=int)])
    length = np.round(rng.lognormal(3.5, 0.6, size=n) + 20 * (y == 1) * rng.random(n))
    entropy = np.clip(rng.normal(4.0, 0.4, size=n) + 0.2 * (y == 1), 0.0, None)
    level_diff = rng.normal(0.0, 1.0, size=n)
    X = np.column_stack([length, entropy, scores[:, 0], scores[:, 1], level_diff])
    perm = rng.permutation(n)
    return Dataset(X[perm], y[perm], SQLI_FEATURES)
