import numpy as np
import pytest

from kronfilter.search import golden_section_log10


class TestGoldenSection:
    def test_quadratic_in_log_space(self):
        target = np.log10(3.7e-3)
        alpha, value, history = golden_section_log10(
            lambda a: (np.log10(a) - target) ** 2, 1e-8, 1e2
        )
        assert np.log10(alpha) == pytest.approx(target, abs=2e-3)
        assert value <= min(v for _, v in history)

    def test_monotone_lands_at_edge(self):
        alpha, _, _ = golden_section_log10(lambda a: -np.log10(a), 1e-6, 1e2)
        assert alpha > 1e1  # driven to the upper end

    def test_degenerate_bracket_single_evaluation(self):
        calls = []

        def f(a):
            calls.append(a)
            return 1.0

        alpha, value, _ = golden_section_log10(f, 0.9999, 1.0)
        assert len(calls) == 1
        assert alpha == pytest.approx(1.0, rel=1e-3)

    def test_invalid_bracket(self):
        with pytest.raises(ValueError, match="bracket"):
            golden_section_log10(lambda a: a, 1.0, 0.5)
        with pytest.raises(ValueError, match="bracket"):
            golden_section_log10(lambda a: a, 0.0, 1.0)

    def test_nan_rejected(self):
        with pytest.raises(RuntimeError, match="NaN"):
            golden_section_log10(lambda a: float("nan"), 1e-3, 1e2)

    def test_inf_values_are_skipped_in_favor_of_finite(self):
        def f(a):
            return float("inf") if a < 1e-2 else np.log10(a)

        alpha, value, _ = golden_section_log10(f, 1e-8, 1e2)
        assert np.isfinite(value)
        assert alpha >= 1e-2
