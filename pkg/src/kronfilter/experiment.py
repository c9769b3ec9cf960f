"""System-identification experiment harness: AR(1) input generation,
impulse-response sourcing, misalignment/rank metrics, and Monte Carlo sweeps
over regularization and construction rank with CSV output.

All randomness flows from (config seed, realization seed) through explicit
generators, so repeated runs produce byte-identical CSVs. Realizations are
independent and may run in parallel (capped by KRONFILTER_THREADS); rows are
sorted before writing so scheduling cannot affect the output.
"""

from __future__ import annotations

import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .alo import LeverageError, alo_metric, select_alpha_alo
from .als import AlsConfig, AlsResult, FilterEstimate, als_run
from .ridge import DataSet, Moments, empirical_moments, ridge_solve, select_alpha_ridge
from .search import DEFAULT_BRACKET
from .tensor_ops import KroneckerShape, mat, vec

CSV_HEADER = "kind,method,r,alpha,misalignment_db,rank_hat,nuclear_norm,seed,wall_time_s,error"
MISALIGNMENT_FLOOR_DB = -300.0

METHOD_FULL_RANK_PRESS = "full_rank_press"
METHOD_FULL_RANK_FIXED = "full_rank_fixed_alpha"
METHOD_KRON_ALO = "kron_alo"
METHOD_KRON_FIXED = "kron_fixed_alpha"
METHOD_KRON_ORACLE = "kron_oracle"


@dataclass(frozen=True)
class TrueFilter:
    """Ground-truth impulse response in vector and matrix form."""

    h: np.ndarray
    h_mat: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float).ravel()
        h_mat = np.asarray(self.h_mat, dtype=float)
        if not np.allclose(h, vec(h_mat)):
            raise ValueError("h must be the column-major vectorization of h_mat")
        if not np.isfinite(h).all() or float(h @ h) == 0.0:
            raise ValueError("impulse response must be finite and nonzero")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "h_mat", h_mat)


@dataclass(frozen=True)
class IrSource:
    """Where the impulse response comes from: a coefficient file or one of
    two synthetic generators."""

    kind: str  # "file" | "synthetic_lowrank" | "synthetic_sparse_exponential"
    path: str | None = None
    rank: int | None = None
    decay: float | None = None
    delay: int | None = None

    def __post_init__(self):
        if self.kind == "file":
            if not self.path:
                raise ValueError("file source needs a path")
        elif self.kind == "synthetic_lowrank":
            if self.rank is None or self.rank < 1:
                raise ValueError("synthetic_lowrank needs rank >= 1")
            if self.decay is None or not 0 < self.decay:
                raise ValueError("synthetic_lowrank needs decay > 0")
        elif self.kind == "synthetic_sparse_exponential":
            if self.delay is None or self.delay < 0:
                raise ValueError("synthetic_sparse_exponential needs delay >= 0")
            if self.decay is None or self.decay < 0:
                raise ValueError("synthetic_sparse_exponential needs decay >= 0")
        else:
            raise ValueError(f"unknown impulse response source {self.kind!r}")


@dataclass(frozen=True)
class MethodSpec:
    """One estimator in a sweep. r applies to the kron methods, alpha to the
    fixed-alpha ones, grid to oracle/grid-mode ALO."""

    name: str
    r: int | None = None
    alpha: float | None = None
    grid: int | None = None

    def __post_init__(self):
        needs_r = self.name in (METHOD_KRON_ALO, METHOD_KRON_FIXED, METHOD_KRON_ORACLE)
        if needs_r and (self.r is None or self.r < 1):
            raise ValueError(f"{self.name} needs a construction rank r >= 1")
        if self.name in (METHOD_KRON_FIXED, METHOD_FULL_RANK_FIXED) and (
            self.alpha is None or self.alpha <= 0
        ):
            raise ValueError(f"{self.name} needs alpha > 0")
        if self.name == METHOD_KRON_ORACLE and (self.grid is None or self.grid < 2):
            raise ValueError(f"{self.name} needs a grid of >= 2 points")
        known = (
            METHOD_FULL_RANK_PRESS,
            METHOD_FULL_RANK_FIXED,
            METHOD_KRON_ALO,
            METHOD_KRON_FIXED,
            METHOD_KRON_ORACLE,
        )
        if self.name not in known:
            raise ValueError(f"unknown method {self.name!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    shape: KroneckerShape
    n_samples: int = 200
    snr_db: float = 5.0
    ar_coeff: float = 0.9
    n_realizations: int = 8
    ir_source: IrSource = IrSource(kind="synthetic_lowrank", rank=3, decay=0.5)
    methods: tuple[MethodSpec, ...] = ()
    seed: int = 1234
    bracket: tuple[float, float] = DEFAULT_BRACKET
    als: AlsConfig = AlsConfig()
    warm_start: bool = True

    def __post_init__(self):
        if self.n_samples < 1 or self.n_realizations < 1:
            raise ValueError("n_samples and n_realizations must be >= 1")
        if not abs(self.ar_coeff) < 1:
            raise ValueError("non-stationary AR coefficient")
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must be a number (math.inf disables noise)")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "bracket", tuple(self.bracket))


@dataclass(frozen=True)
class SweepRecord:
    """One CSV row; metric fields are None when the cell failed."""

    kind: str
    method: str
    r: int
    alpha: float | None
    misalignment_db: float | None
    rank_hat: float | None
    nuclear_norm: float | None
    realization_seed: int
    wall_time_s: float
    error: str = ""


def ar1_generate(length: int, a: float, seed, burn_in: int = 0) -> np.ndarray:
    """First-order autoregressive sequence x[t] = a x[t-1] + u[t] driven by
    unit-variance white Gaussian innovations; the first burn_in samples are
    discarded."""
    if not abs(a) < 1:
        raise ValueError("non-stationary AR coefficient")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(length + burn_in)
    x = scipy.signal.lfilter([1.0], [1.0, -a], u)
    return x[burn_in:]


def default_burn_in(a: float) -> int:
    """Roughly ten time constants of the AR(1) decay."""
    return 10 * math.ceil(1.0 / (1.0 - abs(a)))


def embed_delay_line(x_stream: np.ndarray, m: int, n: int) -> np.ndarray:
    """Toeplitz embedding: column j holds the m most recent samples ending at
    stream position j (most recent first), taken from the stream tail."""
    x_stream = np.asarray(x_stream, dtype=float).ravel()
    if x_stream.size < n + m - 1:
        raise ValueError(
            f"stream of length {x_stream.size} too short for m={m}, n={n} "
            f"(needs {n + m - 1})"
        )
    tail = x_stream[x_stream.size - (n + m - 1):]
    rows = (m - 1) - np.arange(m)
    cols = np.arange(n)
    return tail[rows[:, None] + cols[None, :]]


def make_true_filter(src: IrSource, shape: KroneckerShape, seed) -> TrueFilter:
    """Load or synthesize the ground-truth impulse response for a shape."""
    m = shape.m
    if src.kind == "file":
        h = _read_ir_file(src.path, m)
    elif src.kind == "synthetic_lowrank":
        if src.rank > min(shape.m1, shape.m2):
            raise ValueError(
                f"synthetic rank {src.rank} exceeds min(m1, m2) = {min(shape.m1, shape.m2)}"
            )
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.standard_normal((shape.m1, src.rank)))
        v, _ = np.linalg.qr(rng.standard_normal((shape.m2, src.rank)))
        s = src.decay ** np.arange(src.rank)
        h_mat = (q * s) @ v.T
        h_mat = h_mat / np.linalg.norm(h_mat)
        return TrueFilter(h=vec(h_mat), h_mat=h_mat)
    else:  # synthetic_sparse_exponential
        if src.delay >= m:
            raise ValueError(f"delay {src.delay} exceeds filter length {m}")
        rng = np.random.default_rng(seed)
        h = np.zeros(m)
        support = np.arange(src.delay, m)
        h[support] = rng.standard_normal(support.size) * np.exp(
            -src.decay * (support - src.delay)
        )
        h = h / np.linalg.norm(h)
    return TrueFilter(h=h, h_mat=mat(h, shape.m1, shape.m2))


def _read_ir_file(path: str, m: int) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                value = float(text)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not math.isfinite(value):
                raise ValueError(f"{path}:{lineno}: non-finite coefficient")
            values.append(value)
    if len(values) != m:
        raise ValueError(f"{path}: expected {m} coefficients, found {len(values)}")
    return np.asarray(values)


def _child_seeds(seed: int, realization_seed: int, count: int = 2) -> list[int]:
    ss = np.random.SeedSequence([int(seed), int(realization_seed)])
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def synthesize_dataset(cfg: ExperimentConfig, tf: TrueFilter, realization_seed: int) -> DataSet:
    """Generate one realization: AR(1) input through the delay line, clean
    output through the true filter, plus white Gaussian noise at the
    configured SNR (math.inf disables the noise)."""
    m = cfg.shape.m
    seed_input, seed_noise = _child_seeds(cfg.seed, realization_seed)
    stream = ar1_generate(
        cfg.n_samples + m - 1, cfg.ar_coeff, seed_input, default_burn_in(cfg.ar_coeff)
    )
    x = embed_delay_line(stream, m, cfg.n_samples)
    y_clean = x.T @ tf.h
    if math.isinf(cfg.snr_db):
        y = y_clean
    else:
        noise_var = float(np.mean(y_clean**2)) / 10.0 ** (cfg.snr_db / 10.0)
        noise = np.random.default_rng(seed_noise).standard_normal(cfg.n_samples)
        y = y_clean + math.sqrt(noise_var) * noise
    return DataSet(x=x, y=y)


def misalignment(w_hat: FilterEstimate, tf: TrueFilter) -> float:
    """Relative squared estimation error in dB; the zero estimate scores
    exactly 0 dB, a perfect estimate is floored at -300 dB."""
    num = float(np.sum((w_hat.w_mat - tf.h_mat) ** 2))
    den = float(np.sum(tf.h_mat**2))
    ratio = num / den
    if ratio <= 10.0**(MISALIGNMENT_FLOOR_DB / 10.0):
        return MISALIGNMENT_FLOOR_DB
    return max(10.0 * math.log10(ratio), MISALIGNMENT_FLOOR_DB)


def rank_estimate(w: np.ndarray, rel_tol: float = 1e-6) -> int:
    """Numerical rank: singular values above rel_tol times the largest."""
    s = np.linalg.svd(np.asarray(w, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def nuclear_norm(w: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(w, dtype=float), compute_uv=False)))


@dataclass
class _Realization:
    """Per-realization state shared across methods, including the warm-started
    alpha-grid solutions reused by oracle and grid-mode ALO."""

    cfg: ExperimentConfig
    tf: TrueFilter
    realization_seed: int
    data: DataSet = field(init=False)
    moments: Moments = field(init=False)
    _grids: dict[tuple[int, int], list[tuple[float, AlsResult]]] = field(default_factory=dict)

    def __post_init__(self):
        self.data = synthesize_dataset(self.cfg, self.tf, self.realization_seed)
        self.moments = empirical_moments(self.data)

    def shape_with_rank(self, r: int) -> KroneckerShape:
        return KroneckerShape(self.cfg.shape.m1, self.cfg.shape.m2, r)

    def grid_solutions(self, r: int, points: int) -> list[tuple[float, AlsResult]]:
        key = (r, points)
        if key not in self._grids:
            lo, hi = self.cfg.bracket
            alphas = np.logspace(math.log10(lo), math.log10(hi), points)
            shape = self.shape_with_rank(r)
            solutions = []
            init = None
            for alpha in alphas:
                res = als_run(
                    self.data, shape, float(alpha), self.cfg.als,
                    init=init, moments=self.moments,
                )
                if self.cfg.warm_start:
                    init = res.factors
                solutions.append((float(alpha), res))
            self._grids[key] = solutions
        return self._grids[key]


def _estimate(ctx: _Realization, spec: MethodSpec) -> tuple[FilterEstimate, float]:
    """Run one method on one realization; returns the estimate and the alpha
    it used."""
    cfg = ctx.cfg
    if spec.name == METHOD_FULL_RANK_PRESS:
        alpha, _ = select_alpha_ridge(ctx.data, cfg.bracket)
        w = ridge_solve(ctx.moments, alpha)
        return FilterEstimate.from_vector(w, cfg.shape, alpha), alpha
    if spec.name == METHOD_FULL_RANK_FIXED:
        w = ridge_solve(ctx.moments, spec.alpha)
        return FilterEstimate.from_vector(w, cfg.shape, spec.alpha), spec.alpha
    if spec.name == METHOD_KRON_FIXED:
        res = als_run(
            ctx.data, ctx.shape_with_rank(spec.r), spec.alpha, cfg.als,
            moments=ctx.moments,
        )
        return res.estimate(), res.alpha
    if spec.name == METHOD_KRON_ALO and spec.grid is None:
        search = select_alpha_alo(
            ctx.data, ctx.shape_with_rank(spec.r), cfg.als,
            bracket=cfg.bracket, warm_start=cfg.warm_start,
        )
        return search.final_solution.estimate(), search.alpha_hat
    if spec.name == METHOD_KRON_ALO:
        solutions = ctx.grid_solutions(spec.r, spec.grid)
        scores = []
        for _, res in solutions:
            try:
                scores.append(alo_metric(ctx.data, res).j_alo)
            except LeverageError:
                scores.append(math.inf)
        best = int(np.argmin(scores))
        if not math.isfinite(scores[best]):
            raise LeverageError("all grid candidates rejected")
        alpha, res = solutions[best]
        return res.estimate(), alpha
    if spec.name == METHOD_KRON_ORACLE:
        solutions = ctx.grid_solutions(spec.r, spec.grid)
        mis = [misalignment(res.estimate(), ctx.tf) for _, res in solutions]
        best = int(np.argmin(mis))
        alpha, res = solutions[best]
        return res.estimate(), alpha
    raise ValueError(f"unknown method {spec.name!r}")


def _method_rank(spec: MethodSpec) -> int:
    # full-rank methods carry r=0 (no construction rank)
    return spec.r if spec.r is not None else 0


def _run_realization(
    cfg: ExperimentConfig, tf: TrueFilter, realization_seed: int, measure_time: bool
) -> list[SweepRecord]:
    ctx = _Realization(cfg=cfg, tf=tf, realization_seed=realization_seed)
    records = []
    for spec in cfg.methods:
        start = time.perf_counter()
        try:
            est, alpha = _estimate(ctx, spec)
            elapsed = time.perf_counter() - start if measure_time else 0.0
            records.append(
                SweepRecord(
                    kind="detail",
                    method=spec.name,
                    r=_method_rank(spec),
                    alpha=alpha,
                    misalignment_db=misalignment(est, tf),
                    rank_hat=rank_estimate(est.w_mat),
                    nuclear_norm=nuclear_norm(est.w_mat),
                    realization_seed=realization_seed,
                    wall_time_s=elapsed,
                )
            )
        except Exception as exc:  # per-cell failures must not kill the sweep
            elapsed = time.perf_counter() - start if measure_time else 0.0
            records.append(
                SweepRecord(
                    kind="detail",
                    method=spec.name,
                    r=_method_rank(spec),
                    alpha=spec.alpha,
                    misalignment_db=None,
                    rank_hat=None,
                    nuclear_norm=None,
                    realization_seed=realization_seed,
                    wall_time_s=elapsed,
                    error=str(exc),
                )
            )
    return records


def _cell_key(spec: MethodSpec) -> tuple:
    # fixed-alpha methods form one cell per alpha; selection methods one per (method, r)
    fixed_alpha = spec.alpha if spec.name in (METHOD_KRON_FIXED, METHOD_FULL_RANK_FIXED) else None
    return (spec.name, _method_rank(spec), fixed_alpha)


def _summaries(cfg: ExperimentConfig, records: list[SweepRecord]) -> list[SweepRecord]:
    cells: dict[tuple, list[SweepRecord]] = {}
    order: list[tuple] = []
    for spec in cfg.methods:
        key = _cell_key(spec)
        if key not in cells:
            cells[key] = []
            order.append(key)
    for rec in records:
        fixed_alpha = rec.alpha if rec.method in (METHOD_KRON_FIXED, METHOD_FULL_RANK_FIXED) else None
        key = (rec.method, rec.r, fixed_alpha)
        cells.setdefault(key, []).append(rec)

    summaries = []
    for key in order:
        group = cells.get(key, [])
        good = [r for r in group if not r.error]
        name, r, fixed_alpha = key
        if not good:
            summaries.append(
                SweepRecord(
                    kind="summary", method=name, r=r, alpha=fixed_alpha,
                    misalignment_db=None, rank_hat=None, nuclear_norm=None,
                    realization_seed=cfg.seed, wall_time_s=0.0,
                    error="all realizations failed",
                )
            )
            continue
        summaries.append(
            SweepRecord(
                kind="summary",
                method=name,
                r=r,
                alpha=float(np.mean([g.alpha for g in good])),
                misalignment_db=float(np.mean([g.misalignment_db for g in good])),
                rank_hat=float(np.mean([g.rank_hat for g in good])),
                nuclear_norm=float(np.mean([g.nuclear_norm for g in good])),
                realization_seed=cfg.seed,
                wall_time_s=float(np.mean([g.wall_time_s for g in good])),
            )
        )
    return summaries


def _max_workers() -> int:
    raw = os.environ.get("KRONFILTER_THREADS", "0")
    try:
        requested = int(raw)
    except ValueError:
        requested = 0
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def run_sweep(cfg: ExperimentConfig, measure_time: bool = False) -> list[SweepRecord]:
    """Run every configured method on every realization.

    Emits one detail row per (realization, method) and one summary row per
    method cell (mean over realizations). Per-cell failures are recorded in
    the error column. With measure_time off (the default) wall times are
    written as 0.0 so repeated runs are byte-identical.
    """
    if not cfg.methods:
        raise ValueError("config lists no methods")
    tf = make_true_filter(cfg.ir_source, cfg.shape, cfg.seed)
    seeds = list(range(cfg.n_realizations))
    workers = min(_max_workers(), len(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(lambda s: _run_realization(cfg, tf, s, measure_time), seeds)
            )
    else:
        chunks = [_run_realization(cfg, tf, s, measure_time) for s in seeds]
    details = [rec for chunk in chunks for rec in chunk]
    records = details + _summaries(cfg, details)
    records.sort(
        key=lambda r: (
            r.kind,
            r.method,
            r.r,
            r.alpha if r.alpha is not None else -math.inf,
            r.realization_seed,
        )
    )
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def records_to_csv(records: list[SweepRecord]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in records:
        fields = [
            r.kind, r.method, _fmt(r.r), _fmt(r.alpha), _fmt(r.misalignment_db),
            _fmt(r.rank_hat), _fmt(r.nuclear_norm), _fmt(r.realization_seed),
            _fmt(r.wall_time_s), r.error.replace(",", ";").replace("\n", " "),
        ]
        out.write(",".join(fields) + "\n")
    return out.getvalue()


def write_csv(records: list[SweepRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(records_to_csv(records))
