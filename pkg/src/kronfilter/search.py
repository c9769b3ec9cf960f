"""Golden-section minimization over a logarithmic regularization bracket."""

from __future__ import annotations

import math
from typing import Callable

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# Bracket and stop width shared by the ridge and low-rank selectors so their
# selected parameters are comparable.
DEFAULT_BRACKET = (1e-8, 1e2)
LOG10_STOP_WIDTH = 1e-3


def golden_section_log10(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol_log10: float = LOG10_STOP_WIDTH,
) -> tuple[float, float, list[tuple[float, float]]]:
    """Minimize f(alpha) for alpha in [lo, hi], searching on log10(alpha).

    f may return inf to mark a failed evaluation. Returns the best evaluated
    (alpha, value) and the full evaluation history in call order. Assumes
    unimodality; with a degenerate bracket (width below tol) only the
    midpoint is evaluated.
    """
    if not (0.0 < lo < hi):
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got ({lo}, {hi})")
    a, b = math.log10(lo), math.log10(hi)
    history: list[tuple[float, float]] = []

    def eval_at(t: float) -> float:
        alpha = 10.0**t
        value = f(alpha)
        if value != value:  # NaN
            raise RuntimeError(f"objective returned NaN at alpha={alpha}")
        history.append((alpha, value))
        return value

    if b - a < tol_log10:
        eval_at(0.5 * (a + b))
    else:
        x1 = b - INVPHI * (b - a)
        x2 = a + INVPHI * (b - a)
        f1, f2 = eval_at(x1), eval_at(x2)
        while b - a > tol_log10:
            if f1 < f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - INVPHI * (b - a)
                f1 = eval_at(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + INVPHI * (b - a)
                f2 = eval_at(x2)

    best_alpha, best_value = min(history, key=lambda av: av[1])
    return best_alpha, best_value, history
