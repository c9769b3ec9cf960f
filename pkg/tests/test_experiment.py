import math

import numpy as np
import pytest
import scipy.linalg

import kronfilter.experiment
from kronfilter import (
    ExperimentConfig,
    FilterEstimate,
    IrSource,
    KroneckerShape,
    MethodSpec,
    ar1_generate,
    embed_delay_line,
    make_true_filter,
    misalignment,
    nuclear_norm,
    rank_estimate,
    records_to_csv,
    run_sweep,
    synthesize_dataset,
)
from kronfilter.experiment import CSV_HEADER, TrueFilter

SHAPE = KroneckerShape(4, 5, 4)
LOWRANK = IrSource(kind="synthetic_lowrank", rank=2, decay=0.5)


class TestAr1:
    def test_white_noise_variance(self):
        x = ar1_generate(100_000, 0.0, seed=1)
        assert np.var(x) == pytest.approx(1.0, rel=0.05)

    def test_stationary_variance(self):
        x = ar1_generate(100_000, 0.9, seed=2, burn_in=1000)
        assert np.var(x) == pytest.approx(1.0 / (1 - 0.81), rel=0.10)

    def test_deterministic(self):
        assert np.array_equal(ar1_generate(100, 0.5, seed=3), ar1_generate(100, 0.5, seed=3))

    def test_rejects_nonstationary(self):
        with pytest.raises(ValueError, match="non-stationary"):
            ar1_generate(10, 1.0, seed=0)


class TestEmbed:
    def test_definition(self):
        cols = embed_delay_line([1.0, 2.0, 3.0, 4.0], m=2, n=3)
        assert np.array_equal(cols, [[2, 3, 4], [1, 2, 3]])

    def test_single_tap(self):
        cols = embed_delay_line(np.arange(10.0), m=1, n=4)
        assert np.array_equal(cols, [[6, 7, 8, 9]])

    def test_shift_structure(self):
        rng = np.random.default_rng(0)
        cols = embed_delay_line(rng.standard_normal(30), m=5, n=20)
        assert np.array_equal(cols[:-1, :-1], cols[1:, 1:])

    def test_too_short(self):
        with pytest.raises(ValueError, match="too short"):
            embed_delay_line([1.0, 2.0], m=2, n=3)


class TestTrueFilter:
    def test_lowrank_rank(self):
        tf = make_true_filter(IrSource(kind="synthetic_lowrank", rank=1, decay=0.5), SHAPE, seed=1)
        assert rank_estimate(tf.h_mat) == 1
        assert np.linalg.norm(tf.h) == pytest.approx(1.0)

    def test_lowrank_nuclear_norm(self):
        d = 0.5
        tf = make_true_filter(IrSource(kind="synthetic_lowrank", rank=3, decay=d), SHAPE, seed=2)
        expected = (1 + d + d**2) / math.sqrt(1 + d**2 + d**4)
        assert nuclear_norm(tf.h_mat) == pytest.approx(expected, abs=1e-9)

    def test_sparse_exponential(self):
        src = IrSource(kind="synthetic_sparse_exponential", delay=6, decay=0.3)
        tf = make_true_filter(src, SHAPE, seed=3)
        assert np.array_equal(tf.h[:6], np.zeros(6))
        assert np.linalg.norm(tf.h) == pytest.approx(1.0)

    def test_file_basis_vector(self, tmp_path):
        path = tmp_path / "ir.txt"
        values = ["0.0"] * 20
        values[7] = "1.0"
        path.write_text("# test impulse\n" + "\n".join(values) + "\n")
        tf = make_true_filter(IrSource(kind="file", path=str(path)), SHAPE, seed=0)
        expected = np.zeros(20)
        expected[7] = 1.0
        assert np.array_equal(tf.h, expected)

    def test_file_wrong_count(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("1.0\n2.0\n")
        with pytest.raises(ValueError, match="expected 20"):
            make_true_filter(IrSource(kind="file", path=str(path)), SHAPE, seed=0)

    def test_file_parse_error_names_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.0\nbogus\n3.0\n")
        with pytest.raises(ValueError, match=":2:"):
            make_true_filter(IrSource(kind="file", path=str(path)), SHAPE, seed=0)

    def test_file_nonfinite_names_line(self, tmp_path):
        path = tmp_path / "inf.txt"
        path.write_text("1.0\n2.0\ninf\n")
        with pytest.raises(ValueError, match=":3:"):
            make_true_filter(IrSource(kind="file", path=str(path)), SHAPE, seed=0)

    def test_zero_filter_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            TrueFilter(h=np.zeros(4), h_mat=np.zeros((2, 2)))


class TestSynthesize:
    def test_noiseless_sentinel(self):
        cfg = ExperimentConfig(shape=SHAPE, n_samples=50, snr_db=math.inf, ir_source=LOWRANK)
        tf = make_true_filter(cfg.ir_source, SHAPE, cfg.seed)
        d = synthesize_dataset(cfg, tf, 0)
        assert np.array_equal(d.y, d.x.T @ tf.h)

    def test_snr_zero_db(self):
        cfg = ExperimentConfig(shape=SHAPE, n_samples=10_000, snr_db=0.0, ir_source=LOWRANK)
        tf = make_true_filter(cfg.ir_source, SHAPE, cfg.seed)
        d = synthesize_dataset(cfg, tf, 0)
        clean = d.x.T @ tf.h
        noise = d.y - clean
        ratio = np.mean(noise**2) / np.mean(clean**2)
        assert 0.8 <= ratio <= 1.25

    def test_deterministic_per_seeds(self):
        cfg = ExperimentConfig(shape=SHAPE, n_samples=40, snr_db=5.0, ir_source=LOWRANK)
        tf = make_true_filter(cfg.ir_source, SHAPE, cfg.seed)
        d1 = synthesize_dataset(cfg, tf, 3)
        d2 = synthesize_dataset(cfg, tf, 3)
        d3 = synthesize_dataset(cfg, tf, 4)
        assert np.array_equal(d1.x, d2.x) and np.array_equal(d1.y, d2.y)
        assert not np.array_equal(d1.y, d3.y)


class TestMetrics:
    def test_zero_estimate_is_zero_db(self):
        tf = make_true_filter(LOWRANK, SHAPE, seed=5)
        est = FilterEstimate(w_mat=np.zeros((4, 5)), w=np.zeros(20), alpha=1.0)
        assert misalignment(est, tf) == 0.0

    def test_perfect_estimate_floored(self):
        tf = make_true_filter(LOWRANK, SHAPE, seed=6)
        est = FilterEstimate(w_mat=tf.h_mat.copy(), w=tf.h.copy(), alpha=1.0)
        assert misalignment(est, tf) == -300.0

    def test_double_estimate_is_zero_db(self):
        tf = make_true_filter(LOWRANK, SHAPE, seed=7)
        est = FilterEstimate(w_mat=2 * tf.h_mat, w=2 * tf.h, alpha=1.0)
        assert misalignment(est, tf) == pytest.approx(0.0, abs=1e-12)

    def test_rank_estimate_cases(self):
        assert rank_estimate(np.eye(3)) == 3
        assert rank_estimate(np.diag([1.0, 1e-12])) == 1
        assert rank_estimate(np.zeros((3, 3))) == 0

    def test_nuclear_norm_cases(self):
        assert nuclear_norm(np.eye(2)) == pytest.approx(2.0)
        a, b = np.array([1.0, 2.0, 2.0]), np.array([3.0, 4.0])
        assert nuclear_norm(np.outer(a, b)) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b))
        rng = np.random.default_rng(8)
        w = rng.standard_normal((4, 5))
        assert nuclear_norm(w) == pytest.approx(np.sum(scipy.linalg.svdvals(w)), abs=1e-10)


class TestNuclearNormTrend:
    def test_non_increasing_over_ascending_alpha_grid(self):
        # shrinkage trend: the nuclear norm must not grow by more than 5%
        # relative per step along an ascending 25-point alpha grid
        from kronfilter import als_run

        shape = KroneckerShape(8, 10, 8)
        cfg = ExperimentConfig(
            shape=shape, n_samples=200, snr_db=5.0,
            ir_source=IrSource(kind="synthetic_lowrank", rank=3, decay=0.5), seed=7,
        )
        tf = make_true_filter(cfg.ir_source, shape, cfg.seed)
        d = synthesize_dataset(cfg, tf, 0)
        init = None
        norms = []
        for alpha in np.logspace(-8, 2, 25):
            res = als_run(d, shape, float(alpha), init=init)
            init = res.factors
            norms.append(nuclear_norm(res.estimate().w_mat))
        steps = np.diff(norms) / np.maximum(norms[:-1], 1e-300)
        assert steps.max() <= 0.05


def small_config(**overrides):
    base = dict(
        shape=KroneckerShape(3, 4, 3),
        n_samples=80,
        snr_db=5.0,
        n_realizations=2,
        ir_source=IrSource(kind="synthetic_lowrank", rank=2, decay=0.5),
        methods=(MethodSpec("kron_fixed_alpha", r=2, alpha=1e-4),),
        seed=99,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunSweep:
    def test_row_contract(self):
        cfg = small_config(n_realizations=1)
        records = run_sweep(cfg)
        assert len(records) == 2
        kinds = sorted(r.kind for r in records)
        assert kinds == ["detail", "summary"]

    def test_byte_identical_reruns(self):
        cfg = small_config(
            methods=(
                MethodSpec("full_rank_press"),
                MethodSpec("kron_alo", r=2),
                MethodSpec("kron_fixed_alpha", r=2, alpha=1e-4),
            )
        )
        csv1 = records_to_csv(run_sweep(cfg))
        csv2 = records_to_csv(run_sweep(cfg))
        assert csv1.encode() == csv2.encode()
        assert csv1.splitlines()[0] == CSV_HEADER

    def test_parallel_matches_serial(self, monkeypatch):
        cfg = small_config(n_realizations=3)
        monkeypatch.setenv("KRONFILTER_THREADS", "1")
        serial = records_to_csv(run_sweep(cfg))
        monkeypatch.setenv("KRONFILTER_THREADS", "3")
        parallel = records_to_csv(run_sweep(cfg))
        assert serial == parallel

    def test_oracle_never_worse_than_alo_on_matched_grid(self):
        # both selectors pick from the same warm-started solution grid, so the
        # oracle (argmin misalignment) is a lower bound by construction
        cfg = small_config(
            n_realizations=2,
            methods=(
                MethodSpec("kron_oracle", r=2, grid=25),
                MethodSpec("kron_alo", r=2, grid=25),
            ),
        )
        records = run_sweep(cfg)
        details = [r for r in records if r.kind == "detail" and not r.error]
        by_seed = {}
        for r in details:
            by_seed.setdefault(r.realization_seed, {})[r.method] = r.misalignment_db
        assert by_seed
        for seed, methods in by_seed.items():
            assert methods["kron_oracle"] <= methods["kron_alo"] + 1e-9

    def test_cell_failures_are_recorded_not_fatal(self, monkeypatch):
        def boom(*args, **kwargs):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(kronfilter.experiment, "select_alpha_ridge", boom)
        cfg = small_config(
            methods=(
                MethodSpec("full_rank_press"),
                MethodSpec("kron_fixed_alpha", r=2, alpha=1e-4),
            )
        )
        records = run_sweep(cfg)
        press_rows = [r for r in records if r.method == "full_rank_press"]
        other_rows = [r for r in records if r.method == "kron_fixed_alpha"]
        assert all("synthetic failure" in r.error or r.kind == "summary" for r in press_rows)
        assert all(r.error for r in press_rows)
        assert all(not r.error for r in other_rows)
        csv_text = records_to_csv(records)
        assert "synthetic failure" in csv_text

    def test_float_formatting_has_17_significant_digits(self):
        cfg = small_config(n_realizations=1)
        csv_text = records_to_csv(run_sweep(cfg))
        detail = [l for l in csv_text.splitlines() if l.startswith("detail")][0]
        alpha_field = detail.split(",")[3]
        assert float(alpha_field) == 1e-4
        mis_field = detail.split(",")[4]
        assert len(mis_field.replace("-", "").replace(".", "").replace("e", "").lstrip("0")) >= 15

    def test_empty_methods_rejected(self):
        with pytest.raises(ValueError, match="methods"):
            run_sweep(small_config(methods=()))

    def test_method_spec_validation(self):
        with pytest.raises(ValueError, match="rank"):
            MethodSpec("kron_alo")
        with pytest.raises(ValueError, match="alpha"):
            MethodSpec("kron_fixed_alpha", r=2)
        with pytest.raises(ValueError, match="grid"):
            MethodSpec("kron_oracle", r=2)
        with pytest.raises(ValueError, match="unknown"):
            MethodSpec("kron_magic")
