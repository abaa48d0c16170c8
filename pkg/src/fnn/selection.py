"""Lasso path by least angle regression, cross-validated lambda, and Bolasso.

The penalized objective is

    RSS(v) + lam * sum_j |v_j| * weight_j

where the intercept column (the leading all-ones column of ``Z``) is never
penalized.  With ``standardize=True`` each penalty weight is the column's
standard deviation, i.e. the plain L1 penalty acts on coefficients of
standardized regressors; with ``standardize=False`` all weights are 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .dataset import bootstrap_resample, derive_seed, kfold_indices


class SelectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class LarsPath:
    """Piecewise-linear lasso path.

    ``coefs[i]`` is aligned with the columns of ``Z`` (index 0 is the
    intercept when ``intercept`` is true) and is exact at ``lambdas[i]``.
    """

    lambdas: np.ndarray
    coefs: np.ndarray
    active_sets: list
    penalty_weights: np.ndarray
    intercept: bool = True
    n_steps: int = 0

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[0])

    def penalized(self, coef) -> np.ndarray:
        coef = np.asarray(coef)
        return coef[..., 1:] if self.intercept else coef


@dataclass(frozen=True)
class BolassoResult:
    frequencies: np.ndarray
    consensus_support: np.ndarray
    b: int
    rho: float
    supports: np.ndarray = field(repr=False)
    lambdas: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "rho": self.rho,
            "frequencies": self.frequencies.tolist(),
            "consensus_support": self.consensus_support.tolist(),
            "lambdas": self.lambdas.tolist(),
        }


def _prepare(Z, y, intercept: bool, standardize: bool):
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    if Z.ndim != 2 or y.shape != (Z.shape[0],):
        raise ValueError(f"shape mismatch: Z {Z.shape}, y {y.shape}")
    if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(y))):
        raise ValueError("Z and y must be finite")
    if Z.shape[0] < 2:
        raise ValueError("need at least two samples")
    if intercept:
        if Z.shape[1] < 1 or not np.all(Z[:, 0] == 1.0):
            raise ValueError("with intercept=True the first column of Z must be all ones")
        X = Z[:, 1:]
        x_mean = X.mean(axis=0)
        y_mean = float(y.mean())
    else:
        X = Z
        x_mean = np.zeros(X.shape[1])
        y_mean = 0.0
    Xc = X - x_mean
    yc = y - y_mean
    if standardize:
        scale = np.sqrt(np.mean(Xc**2, axis=0))
        scale = np.where(scale > 0, scale, 1.0)
    else:
        scale = np.ones(X.shape[1])
    return Xc / scale, yc, x_mean, y_mean, scale


def lambda_max(Z, y, *, intercept: bool = True, standardize: bool = True) -> float:
    """Smallest lambda at which every penalized coefficient is zero."""
    Xs, yc, *_ = _prepare(Z, y, intercept, standardize)
    if Xs.shape[1] == 0:
        return 0.0
    return float(2.0 * np.max(np.abs(Xs.T @ yc)))


def lars_lasso_path(
    Z,
    y,
    *,
    intercept: bool = True,
    standardize: bool = True,
    lambda_min: float = 0.0,
    max_steps: Optional[int] = None,
    collinear_tol: float = 1e-10,
) -> LarsPath:
    """Full lasso regularization path via LARS with the lasso modification.

    Variables whose coefficient crosses zero leave the active set.  A variable
    numerically in the span of the active set is never admitted.  The path
    stops at lam = 0 or at the first breakpoint at or below ``lambda_min``.
    """
    Xs, yc, x_mean, y_mean, scale = _prepare(Z, y, intercept, standardize)
    K, p = Xs.shape
    G = Xs.T @ Xs
    c0 = Xs.T @ yc
    if max_steps is None:
        max_steps = 8 * max(p, 1) + 16

    beta = np.zeros(p)
    excluded = np.diag(G) <= 0
    active: list[int] = []
    signs: list[float] = []
    L = np.zeros((p, p))

    cov = c0.copy()
    C = float(np.max(np.abs(np.where(excluded, 0.0, cov)))) if p else 0.0
    C_scale = C
    lambdas = [2.0 * C]
    betas = [beta.copy()]
    actives = [()]
    steps = 0

    if C <= 0.0:
        return _finish(lambdas, betas, actives, x_mean, y_mean, scale, intercept, steps)

    eps = 1e-12 * C_scale
    just_dropped: Optional[int] = None

    def try_add(j: int) -> None:
        k = len(active)
        gjj = G[j, j]
        if k:
            l = solve_triangular(L[:k, :k], G[active, j], lower=True, check_finite=False)
            d2 = gjj - l @ l
        else:
            l = np.empty(0)
            d2 = gjj
        if d2 <= collinear_tol * gjj:
            excluded[j] = True
            return
        L[k, :k] = l
        L[k, k] = np.sqrt(d2)
        active.append(j)
        signs.append(float(np.sign(cov[j])) or 1.0)

    try_add(int(np.argmax(np.abs(np.where(excluded, 0.0, cov)))))
    actives[0] = tuple(active)

    while steps < max_steps:
        if not active:
            break

        k = len(active)
        s = np.array(signs)
        Lk = L[:k, :k]
        w = solve_triangular(Lk.T, solve_triangular(Lk, s, lower=True, check_finite=False),
                             lower=False, check_finite=False)
        a = G[:, active] @ w

        gamma, event, who = C, "end", -1

        cand = ~excluded
        cand[active] = False
        if cand.any():
            idx = np.flatnonzero(cand)
            ci, ai = cov[idx], a[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                g1 = np.where(1.0 - ai > 1e-15, (C - ci) / (1.0 - ai), np.inf)
                g2 = np.where(1.0 + ai > 1e-15, (C + ci) / (1.0 + ai), np.inf)
            if just_dropped is not None:
                # the dropped variable sits at |c| = C; only its opposite-sign re-entry is genuine
                (pos,) = np.flatnonzero(idx == just_dropped)
                if ci[pos] > 0:
                    g1[pos] = np.inf
                else:
                    g2[pos] = np.inf
            g = np.minimum(np.where(g1 > eps, g1, np.inf), np.where(g2 > eps, g2, np.inf))
            m = int(np.argmin(g))
            if g[m] < gamma:
                gamma, event, who = float(g[m]), "join", int(idx[m])

        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = -beta[active] / w
        ratios = np.where(ratios > eps, ratios, np.inf)
        m = int(np.argmin(ratios))
        if ratios[m] < gamma:
            gamma, event, who = float(ratios[m]), "drop", active[m]

        beta[active] += gamma * w
        C = 0.0 if event == "end" else C - gamma
        cov = c0 - G @ beta
        steps += 1
        just_dropped = None

        if event == "drop":
            pos = active.index(who)
            beta[who] = 0.0
            del active[pos]
            del signs[pos]
            k = len(active)
            if k:
                L[:k, :k] = np.linalg.cholesky(G[np.ix_(active, active)])
            just_dropped = who
        elif event == "join":
            try_add(who)

        lambdas.append(2.0 * C)
        betas.append(beta.copy())
        actives.append(tuple(sorted(active)))
        if event == "end" or 2.0 * C <= lambda_min:
            break

    return _finish(lambdas, betas, actives, x_mean, y_mean, scale, intercept, steps)


def _finish(lambdas, betas, actives, x_mean, y_mean, scale, intercept, steps) -> LarsPath:
    B = np.array(betas) / scale
    if intercept:
        b0 = y_mean - B @ x_mean
        coefs = np.column_stack([b0, B])
    else:
        coefs = B
    return LarsPath(np.array(lambdas), coefs, list(actives), scale.copy(), intercept, steps)


def coefficients_at(path: LarsPath, lam):
    """Coefficients at ``lam`` (scalar or array), linear between breakpoints."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam_arr < 0):
        raise ValueError("lambda must be non-negative")
    lams = path.lambdas
    n = lams.size
    # ascending copy; zero-length steps leave duplicate lambdas with equal coefficients
    rev = lams[::-1]
    pos = np.searchsorted(rev, lam_arr, side="right")  # rev[pos-1] <= lam < rev[pos]
    hi = np.clip(n - pos - 1, 0, n - 1)  # last breakpoint with lambda > lam
    lo = np.clip(n - pos, 0, n - 1)  # first breakpoint with lambda <= lam
    lam_hi, lam_lo = lams[hi], lams[lo]
    span = lam_hi - lam_lo
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(span > 0, (lam_hi - lam_arr) / span, 1.0)
    frac = np.clip(frac, 0.0, 1.0)[:, None]
    out = path.coefs[hi] + frac * (path.coefs[lo] - path.coefs[hi])
    exact = lam_arr == lam_lo
    out[exact] = path.coefs[lo[exact]]
    out[lam_arr >= lams[0]] = path.coefs[0]
    out[lam_arr <= lams[-1]] = path.coefs[-1]
    return out[0] if np.ndim(lam) == 0 else out


def lambda_grid(lam_max: float, n: int = 50, ratio: float = 1e-4) -> np.ndarray:
    """Log-spaced, decreasing grid from ``lam_max`` down to ``ratio * lam_max``."""
    return np.geomspace(lam_max, ratio * lam_max, n)


def _fold_ids(K: int, folds: int, seed: int, groups=None) -> np.ndarray:
    """Fold label per sample; members of one group always share a fold."""
    if groups is None:
        fid = np.empty(K, dtype=int)
        for f, held in enumerate(kfold_indices(K, folds, seed)):
            fid[held] = f
        return fid
    groups = np.asarray(groups)
    uniq, inverse = np.unique(groups, return_inverse=True)
    if uniq.size < folds:
        raise ValueError(f"{uniq.size} distinct groups cannot be split into {folds} folds")
    gfold = np.empty(uniq.size, dtype=int)
    for f, held in enumerate(kfold_indices(uniq.size, folds, seed)):
        gfold[held] = f
    return gfold[inverse]


def cv_curve(Z, y, folds: int, seed: int, *, groups=None, intercept=True, standardize=True,
             n_lambdas=50):
    """Held-out squared error over the lambda grid.

    Returns ``(grid, fold_errors)`` with ``fold_errors`` of shape (folds, n_lambdas).
    Samples sharing a ``groups`` label (e.g. bootstrap copies of one
    observation) are kept in the same fold so no copy is scored on itself.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    K = Z.shape[0]
    if folds < 2:
        raise ValueError("folds must be at least 2")
    if K < folds:
        raise ValueError(f"{K} samples cannot be split into {folds} folds")
    lmax = lambda_max(Z, y, intercept=intercept, standardize=standardize)
    if lmax <= 0:
        return np.zeros(1), np.zeros((folds, 1))
    grid = lambda_grid(lmax, n_lambdas)
    fid = _fold_ids(K, folds, seed, groups)
    errors = np.zeros((folds, grid.size))
    for f in range(folds):
        held = fid == f
        train = ~held
        # RSS grows with the sample count; keep lambda per-sample comparable
        factor = train.sum() / K
        path = lars_lasso_path(Z[train], y[train], intercept=intercept, standardize=standardize,
                               lambda_min=grid[-1] * factor)
        coefs = coefficients_at(path, grid * factor)
        pred = coefs @ Z[held].T
        errors[f] = np.mean((pred - y[held]) ** 2, axis=1)
    return grid, errors


def select_lambda_cv(Z, y, folds: int = 10, seed: int = 0, *, groups=None, rule: str = "min",
                     intercept=True, standardize=True, n_lambdas: int = 50) -> float:
    """Grid lambda chosen by K-fold CV.

    ``rule="min"`` takes the lowest mean held-out error, ties going to the
    larger lambda.  ``rule="1se"`` takes the largest lambda whose error is
    within one standard error (across folds) of that minimum.
    """
    grid, fold_err = cv_curve(Z, y, folds, seed, groups=groups, intercept=intercept,
                              standardize=standardize, n_lambdas=n_lambdas)
    mean = fold_err.mean(axis=0)
    i = int(np.argmin(mean))
    if rule == "min":
        slack = 1e-12 * max(abs(mean[i]), 1e-300)
    elif rule == "1se":
        slack = fold_err[:, i].std(ddof=1) / np.sqrt(fold_err.shape[0])
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return float(grid[mean <= mean[i] + slack].max())


def lasso_support(Z, y, folds: int, seed: int, *, groups=None, rule="min", intercept=True,
                  standardize=True):
    """Support of the CV-tuned lasso fit: (boolean mask over penalized columns, lambda)."""
    lam = select_lambda_cv(Z, y, folds, seed, groups=groups, rule=rule, intercept=intercept,
                           standardize=standardize)
    path = lars_lasso_path(Z, y, intercept=intercept, standardize=standardize, lambda_min=lam)
    coef = path.penalized(coefficients_at(path, lam))
    return coef != 0, lam


def _is_label_vector(y) -> bool:
    vals = np.unique(y)
    return vals.size == 2 and set(vals.tolist()) <= {-1.0, 1.0}


def bolasso_supports(Z, y, b: int, folds: int, seed: int, *, rule="min", intercept=True,
                     standardize=True):
    """Per-replication lasso supports (b x p boolean) and chosen lambdas.

    Replication ``r`` depends only on ``(seed, r)``, so the first ``b'`` rows
    for ``b' < b`` coincide with a run using ``b'`` replications.
    """
    if b < 1:
        raise ValueError("b must be at least 1")
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    K = Z.shape[0]
    p = Z.shape[1] - (1 if intercept else 0)
    labels = _is_label_vector(y)
    supports = np.zeros((b, p), dtype=bool)
    lams = np.zeros(b)
    for r in range(b):
        idx = bootstrap_resample(K, derive_seed(seed, r))
        if labels and np.unique(y[idx]).size < 2:
            idx = bootstrap_resample(K, derive_seed(seed, r, 1))
            if np.unique(y[idx]).size < 2:
                raise SelectionError(f"bootstrap replication {r} drew a single class twice")
        supports[r], lams[r] = lasso_support(Z[idx], y[idx], folds, derive_seed(seed, r, 2),
                                             groups=idx, rule=rule, intercept=intercept,
                                             standardize=standardize)
    return supports, lams


def consensus(supports, rho: float, b: Optional[int] = None, lambdas=None) -> BolassoResult:
    """Consensus over the first ``b`` replications: keep regressors chosen in at least ``rho`` of them."""
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    supports = np.asarray(supports, dtype=bool)
    b = supports.shape[0] if b is None else int(b)
    if not 1 <= b <= supports.shape[0]:
        raise ValueError(f"b={b} outside 1..{supports.shape[0]}")
    lams = np.zeros(supports.shape[0]) if lambdas is None else np.asarray(lambdas, dtype=float)
    sub = supports[:b]
    counts = sub.sum(axis=0)
    support = np.flatnonzero(counts >= rho * b - 1e-9)
    return BolassoResult(counts / b, support, b, float(rho), sub, lams[:b])


def bolasso_select(Z, y, b: int, rho: float, folds: int = 10, seed: int = 0, *, rule="min",
                   intercept=True, standardize=True) -> BolassoResult:
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    supports, lams = bolasso_supports(Z, y, b, folds, seed, rule=rule, intercept=intercept,
                                      standardize=standardize)
    return consensus(supports, rho, lambdas=lams)
