"""Dense SVD, Moore-Penrose pseudoinverse and minimum-norm least squares."""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np


class SvdError(np.linalg.LinAlgError):
    pass


class SvdResult(NamedTuple):
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or 0 in A.shape:
        raise ValueError(f"expected a non-empty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def svd(A) -> SvdResult:
    """Thin SVD ``A = U diag(s) V^T`` with non-increasing ``s`` (LAPACK gesdd)."""
    A = _as_matrix(A)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdError(f"SVD did not converge for {A.shape[0]}x{A.shape[1]} matrix") from exc
    return SvdResult(U, s, Vt.T)


def default_tol(A_shape, s_max: float) -> float:
    return max(A_shape) * np.finfo(float).eps * s_max


def pseudoinverse(A, tol: Optional[float] = None) -> np.ndarray:
    """Moore-Penrose inverse; singular values at or below ``tol`` are treated as zero."""
    A = _as_matrix(A)
    U, s, V = svd(A)
    if tol is None:
        tol = default_tol(A.shape, s[0] if s.size else 0.0)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    keep = s > tol
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (V * inv) @ U.T


def least_squares_solve(A, y, tol: Optional[float] = None) -> np.ndarray:
    """Minimum-norm minimizer of ``||A v - y||``."""
    A = _as_matrix(A)
    y = np.asarray(y, dtype=float)
    if y.shape != (A.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({A.shape[0]},)")
    return pseudoinverse(A, tol) @ y
