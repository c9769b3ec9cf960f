"""Approximate leave-one-out selection of the regularization parameter.

The approximate metric prices each sample's removal with one Newton step of
the stacked-factor problem taken at the full-data solution: the step reduces
to inflating the residual by 1/(1 - z_n), where z_n is a leverage computed
through the concatenated structured matrix and a Gauss-Newton Hessian. The
exact leave-one-out oracle (N full re-solves) is kept for validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .als import AlsConfig, AlsResult, als_run
from .ridge import DataSet, empirical_moments
from .search import DEFAULT_BRACKET, LOG10_STOP_WIDTH, golden_section_log10
from .tensor_ops import (
    FactorPair,
    KroneckerShape,
    build_factor_matrix,
    concat_factor_matrices,
    reconstruct,
)


class LeverageError(RuntimeError):
    """Raised when a leverage reaches 1 and the metric is undefined."""


@dataclass(frozen=True)
class AloEvaluation:
    """One metric evaluation: j_alo = mean((residual / (1 - leverage))^2)."""

    alpha: float
    j_alo: float
    leverages: np.ndarray
    residuals: np.ndarray


@dataclass
class AlphaSearchResult:
    alpha_hat: float
    j_alo_at_min: float
    evaluations: list[AloEvaluation]
    final_solution: AlsResult


def build_hessian_approx(d: DataSet, a_hat: np.ndarray, alpha: float) -> np.ndarray:
    """Gauss-Newton Hessian of the stacked-factor problem:
    A.T X X.T A + N alpha I, assembled as (A.T X)(A.T X).T + N alpha I."""
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    g = a_hat.T @ d.x
    f = g @ g.T + d.n * alpha * np.eye(a_hat.shape[1])
    if not np.isfinite(f).all():
        raise RuntimeError("non-finite entries in the Hessian approximation")
    return 0.5 * (f + f.T)


def _concatenated_matrix(fp: FactorPair) -> np.ndarray:
    shape = fp.shape
    a1 = build_factor_matrix("one", fp, shape)
    a2 = build_factor_matrix("two", fp, shape)
    return concat_factor_matrices(a1, a2)


def alo_metric(d: DataSet, result: AlsResult) -> AloEvaluation:
    """Evaluate the approximate leave-one-out error of a converged solution.

    One Cholesky factorization of the Hessian serves all N leverages:
    z_n = x_n.T A F^{-1} A.T x_n is the squared norm of the whitened
    projected sample.
    """
    a_hat = _concatenated_matrix(result.factors)
    f = build_hessian_approx(d, a_hat, result.alpha)
    chol = np.linalg.cholesky(f)
    g = a_hat.T @ d.x
    half = scipy.linalg.solve_triangular(chol, g, lower=True, check_finite=False)
    z = np.einsum("ij,ij->j", half, half)
    if np.any(z >= 1.0):
        raise LeverageError(
            f"leverage >= 1: alpha too small or N too small for shape (max z = {z.max()})"
        )
    _, w = reconstruct(result.factors)
    resid = d.y - d.x.T @ w
    j_alo = float(np.mean((resid / (1.0 - z)) ** 2))
    return AloEvaluation(alpha=result.alpha, j_alo=j_alo, leverages=z, residuals=resid)


def exact_lo_metric(
    d: DataSet,
    shape: KroneckerShape,
    alpha: float,
    cfg: AlsConfig = AlsConfig(),
) -> float:
    """Exact leave-one-out error: N re-solves, each warm-started from the
    full-data solution.

    The held-out objective keeps the full-sample normalization of the fit
    term, so the reduced problem is solved with alpha * N / (N - 1).
    """
    if d.n < 2:
        raise ValueError("exact leave-one-out needs at least two samples")
    full = als_run(d, shape, alpha, cfg)
    alpha_heldout = alpha * d.n / (d.n - 1)
    errors = np.empty(d.n)
    for i in range(d.n):
        res = als_run(d.without_sample(i), shape, alpha_heldout, cfg, init=full.factors)
        _, w = reconstruct(res.factors)
        errors[i] = (d.y[i] - d.x[:, i] @ w) ** 2
    return float(np.mean(errors))


class _WarmStartPool:
    """Factors of previously solved candidates, keyed by log10(alpha);
    lookups return the nearest candidate (first-solved wins ties)."""

    def __init__(self):
        self._entries: list[tuple[float, FactorPair]] = []

    def nearest(self, alpha: float) -> FactorPair | None:
        if not self._entries:
            return None
        t = math.log10(alpha)
        best = min(self._entries, key=lambda e: abs(e[0] - t))
        return best[1]

    def add(self, alpha: float, factors: FactorPair) -> None:
        self._entries.append((math.log10(alpha), factors))


def select_alpha_alo(
    d: DataSet,
    shape: KroneckerShape,
    cfg: AlsConfig = AlsConfig(),
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    warm_start: bool = True,
    grid: int | None = None,
    tol_log10: float = LOG10_STOP_WIDTH,
) -> AlphaSearchResult:
    """Minimize the approximate leave-one-out error over the bracket.

    Golden-section search on log10(alpha) by default; with grid set, a fixed
    log-spaced grid of that many points is evaluated instead (robust to
    non-unimodal metrics). Candidates warm-start from the nearest previously
    solved alpha unless warm_start is disabled. Candidates whose metric is
    undefined (leverage at 1) are skipped; if every candidate fails, raises.
    """
    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got ({lo}, {hi})")
    moments = empirical_moments(d)
    pool = _WarmStartPool()
    solutions: dict[float, AlsResult] = {}
    evaluations: list[AloEvaluation] = []

    def evaluate(alpha: float) -> float:
        init = pool.nearest(alpha) if warm_start else None
        res = als_run(d, shape, alpha, cfg, init=init, moments=moments)
        pool.add(alpha, res.factors)
        solutions[alpha] = res
        try:
            ev = alo_metric(d, res)
        except LeverageError:
            return math.inf
        evaluations.append(ev)
        return ev.j_alo

    if grid is not None:
        alphas = np.logspace(math.log10(lo), math.log10(hi), grid)
        values = [evaluate(a) for a in alphas]
        best_idx = int(np.argmin(values))
        alpha_hat, j_min = float(alphas[best_idx]), values[best_idx]
    else:
        alpha_hat, j_min, _ = golden_section_log10(evaluate, lo, hi, tol_log10)

    if not evaluations:
        raise LeverageError(
            f"all candidate evaluations failed on bracket ({lo}, {hi})"
        )
    return AlphaSearchResult(
        alpha_hat=alpha_hat,
        j_alo_at_min=j_min,
        evaluations=evaluations,
        final_solution=solutions[alpha_hat],
    )
