"""Empirical moments, full-rank ridge solution, and exact leave-one-out
(PRESS) selection of its regularization parameter.

The ridge problem is min_w (1/N) ||y - X.T w||^2 + alpha ||w||^2 with
solution (Rxx + alpha I)^{-1} rxy; PRESS evaluates its leave-one-out error
in closed form through the per-sample leverages, which is exact because the
objective is quadratic. Leaving a sample out keeps the penalty weight N*alpha
(the held-out objective drops one data term only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .search import DEFAULT_BRACKET, LOG10_STOP_WIDTH, golden_section_log10


@dataclass(frozen=True)
class DataSet:
    """Input columns x (m x n) and output vector y (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim != 2:
            raise ValueError("x must be a 2-d array of column samples")
        if x.shape[1] != y.size or y.size < 1:
            raise ValueError(f"sample counts differ: x has {x.shape[1]}, y has {y.size}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("data must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def without_sample(self, idx: int) -> "DataSet":
        keep = np.ones(self.n, dtype=bool)
        keep[idx] = False
        return DataSet(self.x[:, keep], self.y[keep])


@dataclass(frozen=True)
class Moments:
    """Time-averaged second-order moments Rxx = X X.T / N, rxy = X y / N."""

    rxx: np.ndarray
    rxy: np.ndarray

    def __post_init__(self):
        rxx = np.asarray(self.rxx, dtype=float)
        rxy = np.asarray(self.rxy, dtype=float).ravel()
        if rxx.shape != (rxy.size, rxy.size):
            raise ValueError(f"moment shapes disagree: {rxx.shape} vs {rxy.size}")
        if not np.allclose(rxx, rxx.T, atol=1e-12 * max(1.0, np.abs(rxx).max())):
            raise ValueError("rxx must be symmetric")
        object.__setattr__(self, "rxx", rxx)
        object.__setattr__(self, "rxy", rxy)


def empirical_moments(d: DataSet) -> Moments:
    rxx = d.x @ d.x.T / d.n
    rxx = 0.5 * (rxx + rxx.T)  # enforce exact symmetry against roundoff
    rxy = d.x @ d.y / d.n
    return Moments(rxx=rxx, rxy=rxy)


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a symmetric (nominally positive-definite) system.

    Cholesky first; falls back to a pivoted symmetric-indefinite
    factorization when the matrix is only borderline definite.
    """
    try:
        c = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
        return scipy.linalg.cho_solve(c, b, check_finite=False)
    except scipy.linalg.LinAlgError:
        return scipy.linalg.solve(a, b, assume_a="sym")


def ridge_solve(m: Moments, alpha: float) -> np.ndarray:
    """Solve (Rxx + alpha I) w = rxy; alpha=0 is allowed only when Rxx is
    invertible."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    a = m.rxx + alpha * np.eye(m.rxy.size)
    try:
        return solve_spd(a, m.rxy)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise ValueError("covariance singular; supply alpha > 0") from exc


def _leverages(d: DataSet, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Return (w, h) with h_n = x_n.T (Rxx + alpha I)^{-1} x_n / N."""
    moments = empirical_moments(d)
    a = moments.rxx + alpha * np.eye(d.m)
    c = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    w = scipy.linalg.cho_solve(c, moments.rxy, check_finite=False)
    ainv_x = scipy.linalg.cho_solve(c, d.x, check_finite=False)
    h = np.einsum("ij,ij->j", d.x, ainv_x) / d.n
    return w, h


def press_loocv(d: DataSet, alpha: float) -> float:
    """Exact leave-one-out mean squared error of the ridge fit at alpha."""
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    w, h = _leverages(d, alpha)
    if np.any(h >= 1.0):
        raise RuntimeError(f"degenerate leverage: max h = {h.max()}")
    resid = d.y - d.x.T @ w
    return float(np.mean((resid / (1.0 - h)) ** 2))


def select_alpha_ridge(
    d: DataSet,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    tol_log10: float = LOG10_STOP_WIDTH,
) -> tuple[float, float]:
    """Golden-section minimization of the PRESS statistic over log10(alpha)."""
    lo, hi = bracket

    def f(alpha: float) -> float:
        value = press_loocv(d, alpha)
        if not np.isfinite(value):
            raise RuntimeError(f"PRESS non-finite at alpha={alpha}")
        return value

    alpha, press, _ = golden_section_log10(f, lo, hi, tol_log10)
    return alpha, press
