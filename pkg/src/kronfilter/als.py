"""Alternating least squares for the equal-penalty Kronecker filter problem.

Each half-iteration solves one factor exactly: with the other factor held
fixed the model is linear through the structured matrix of that side, so the
update is a ridge solve in the m_k*r factor coordinates. The data enters
only through the second-order moments, which are computed once per dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .ridge import DataSet, Moments, empirical_moments, ridge_solve, solve_spd
from .tensor_ops import (
    SIDE_ONE,
    SIDE_TWO,
    FactorPair,
    KroneckerShape,
    build_factor_matrix,
    mat,
    reconstruct,
)

# Floor keeping the per-factor systems invertible; "alpha ~ 0" experiments
# use 1e-8 explicitly.
MIN_ALPHA = 1e-12


@dataclass(frozen=True)
class AlsConfig:
    """Iteration budget and early-stop threshold on the relative objective
    decrease over one full iteration."""

    iterations: int = 20
    rel_tol: float = 1e-8
    record_trace: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.rel_tol < 0:
            raise ValueError(f"rel_tol must be >= 0, got {self.rel_tol}")


@dataclass
class AlsResult:
    """Solver output. When recorded, objective_trace holds the objective at
    initialization followed by one value per half-iteration."""

    factors: FactorPair
    objective_trace: list[float]
    alpha: float
    converged: bool

    def estimate(self) -> "FilterEstimate":
        w_mat, w = reconstruct(self.factors)
        return FilterEstimate(w_mat=w_mat, w=w, alpha=self.alpha)


@dataclass(frozen=True)
class FilterEstimate:
    """A reconstructed filter in matrix and vector form, tagged with the
    regularization that produced it."""

    w_mat: np.ndarray
    w: np.ndarray
    alpha: float

    @classmethod
    def from_vector(cls, w: np.ndarray, shape: KroneckerShape, alpha: float) -> "FilterEstimate":
        w = np.asarray(w, dtype=float).ravel()
        return cls(w_mat=mat(w, shape.m1, shape.m2), w=w, alpha=alpha)


def objective(d: DataSet, fp: FactorPair, alpha: float) -> float:
    """(1/N) ||y - X.T vec(U1 U2.T)||^2 + alpha (||U1||_F^2 + ||U2||_F^2)."""
    return objective_two_penalty(d, fp, alpha, alpha)


def objective_two_penalty(d: DataSet, fp: FactorPair, alpha1: float, alpha2: float) -> float:
    """Variant with separate per-factor penalties; the equal-penalty problem
    is equivalent to any (alpha1, alpha2) with the same geometric mean under
    the factor rescaling (b*U1, U2/b)."""
    _, w = reconstruct(fp)
    resid = d.y - d.x.T @ w
    fit = float(resid @ resid) / d.n
    return fit + alpha1 * float(np.sum(fp.u1**2)) + alpha2 * float(np.sum(fp.u2**2))


def svd_init(w_full: np.ndarray, shape: KroneckerShape) -> FactorPair:
    """Balanced factors of the best rank-r approximation of mat(w_full).

    Splits each singular value evenly between the sides: U1 = Q diag(sqrt(s)),
    U2 = V diag(sqrt(s)), so U1 @ U2.T is the truncated SVD reconstruction.
    """
    w_full = np.asarray(w_full, dtype=float).ravel()
    if w_full.size != shape.m:
        raise ValueError(f"expected length {shape.m}, got {w_full.size}")
    q, s, vt = np.linalg.svd(mat(w_full, shape.m1, shape.m2), full_matrices=False)
    root = np.sqrt(s[: shape.r])
    u1 = q[:, : shape.r] * root
    u2 = vt[: shape.r].T * root
    return FactorPair(u1=u1, u2=u2)


def als_subproblem(
    d: DataSet,
    fp: FactorPair,
    side: str,
    alpha: float,
    moments: Moments | None = None,
) -> FactorPair:
    """Exactly minimize the objective over one factor, the other held fixed.

    Builds the structured matrix of the requested side from the current other
    factor, projects the moments into factor coordinates, and solves the
    resulting ridge system.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0 for the factor update, got {alpha}")
    if moments is None:
        moments = empirical_moments(d)
    shape = fp.shape
    a = build_factor_matrix(side, fp, shape).a
    rk = a.T @ moments.rxx @ a
    rk = 0.5 * (rk + rk.T)
    rky = a.T @ moments.rxy
    u = solve_spd(rk + alpha * np.eye(rk.shape[0]), rky)
    if not np.isfinite(u).all():
        raise RuntimeError(f"non-finite factor update for side {side} at alpha={alpha}")
    if side == SIDE_ONE:
        return replace(fp, u1=mat(u, shape.m1, shape.r))
    return replace(fp, u2=mat(u, shape.m2, shape.r))


def als_run(
    d: DataSet,
    shape: KroneckerShape,
    alpha: float,
    cfg: AlsConfig = AlsConfig(),
    init: FactorPair | None = None,
    moments: Moments | None = None,
) -> AlsResult:
    """Run alternating least squares at a fixed regularization.

    Without an explicit init, starts from the balanced rank-r SVD split of
    the full-rank ridge solution at the same alpha. Each outer iteration
    updates side one then side two; stops early when the objective decrease
    over a full iteration falls below rel_tol relatively.
    """
    alpha = max(float(alpha), MIN_ALPHA)
    if moments is None:
        moments = empirical_moments(d)
    if init is None:
        fp = svd_init(ridge_solve(moments, alpha), shape)
    else:
        if init.shape != shape:
            raise ValueError(f"init shape {init.shape} does not match {shape}")
        fp = init

    trace: list[float] = []
    prev = objective(d, fp, alpha)
    if cfg.record_trace:
        trace.append(prev)
    converged = False
    for _ in range(cfg.iterations):
        fp = als_subproblem(d, fp, SIDE_ONE, alpha, moments)
        if cfg.record_trace:
            trace.append(objective(d, fp, alpha))
        fp = als_subproblem(d, fp, SIDE_TWO, alpha, moments)
        current = objective(d, fp, alpha)
        if cfg.record_trace:
            trace.append(current)
        if prev - current < cfg.rel_tol * max(prev, np.finfo(float).tiny):
            converged = True
            break
        prev = current
    return AlsResult(factors=fp, objective_trace=trace, alpha=alpha, converged=converged)
