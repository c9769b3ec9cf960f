"""Oracle cross-checks: PRESS against brute-force leave-one-out, and the
approximate leave-one-out metric against the exact oracle.

The brute-force ridge oracle below re-solves the held-out problem from the
raw data with plain dense solves; it shares no code path with press_loocv.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alo import exact_lo_metric, select_alpha_alo
from .als import AlsConfig
from .ridge import DataSet, press_loocv
from .tensor_ops import KroneckerShape


def brute_force_loo_ridge(d: DataSet, alpha: float) -> float:
    """Leave-one-out error of the ridge fit by N explicit re-solves.

    The held-out problem keeps the penalty weight N*alpha:
    min_w sum_{i != n} (y_i - x_i.T w)^2 + N alpha ||w||^2.
    """
    s = d.x @ d.x.T
    b = d.x @ d.y
    n = d.n
    errors = np.empty(n)
    for i in range(n):
        xi = d.x[:, i]
        a_i = s - np.outer(xi, xi) + n * alpha * np.eye(d.m)
        w_i = np.linalg.solve(a_i, b - xi * d.y[i])
        errors[i] = (d.y[i] - xi @ w_i) ** 2
    return float(np.mean(errors))


@dataclass(frozen=True)
class CheckResult:
    label: str
    passed: bool
    worst_rel_error: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.label}: worst relative error "
            f"{self.worst_rel_error:.3e} (tolerance {self.tolerance:.1e})"
        )


def press_check(
    n_instances: int = 20,
    alphas: tuple[float, ...] = (1e-3, 1e-1, 10.0),
    seed: int = 7,
    tolerance: float = 1e-9,
) -> CheckResult:
    """PRESS must match brute-force leave-one-out on random ridge instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        m = int(rng.integers(2, 11))
        n = int(rng.integers(m + 2, 51))
        d = DataSet(rng.standard_normal((m, n)), rng.standard_normal(n))
        alpha = float(rng.choice(alphas))
        press = press_loocv(d, alpha)
        brute = brute_force_loo_ridge(d, alpha)
        worst = max(worst, abs(press - brute) / max(brute, 1e-300))
    return CheckResult("PRESS vs brute-force LOO", worst <= tolerance, worst, tolerance)


def alo_check(
    shape: KroneckerShape = KroneckerShape(3, 4, 2),
    n_samples: int = 120,
    snr_db: float = 5.0,
    n_seeds: int = 10,
    seed: int = 11,
    tolerance: float = 0.10,
) -> CheckResult:
    """At the selected alpha, the approximate metric must sit within the
    tolerance of the exact leave-one-out oracle."""
    from .experiment import ExperimentConfig, IrSource, make_true_filter, synthesize_dataset

    cfg_als = AlsConfig()
    worst = 0.0
    for k in range(n_seeds):
        cfg = ExperimentConfig(
            shape=shape,
            n_samples=n_samples,
            snr_db=snr_db,
            ir_source=IrSource(kind="synthetic_lowrank", rank=shape.r, decay=0.5),
            methods=(),
            seed=seed + k,
        )
        tf = make_true_filter(cfg.ir_source, shape, cfg.seed)
        d = synthesize_dataset(cfg, tf, 0)
        search = select_alpha_alo(d, shape, cfg_als)
        j_alo = search.j_alo_at_min
        j_lo = exact_lo_metric(d, shape, search.alpha_hat, cfg_als)
        worst = max(worst, abs(j_alo - j_lo) / j_lo)
    return CheckResult("ALO vs exact LO at selected alpha", worst <= tolerance, worst, tolerance)


def run_validation(verbose: bool = True) -> bool:
    """Run both oracle suites; returns overall pass."""
    results = [press_check(), alo_check()]
    if verbose:
        for res in results:
            print(res.line())
    return all(res.passed for res in results)
