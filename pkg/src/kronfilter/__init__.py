"""Low-rank MMSE filter estimation via Kronecker-product factors, with
automatic regularization selection by approximate leave-one-out
cross-validation."""

from .alo import (
    AloEvaluation,
    AlphaSearchResult,
    LeverageError,
    alo_metric,
    build_hessian_approx,
    exact_lo_metric,
    select_alpha_alo,
)
from .als import (
    AlsConfig,
    AlsResult,
    FilterEstimate,
    als_run,
    als_subproblem,
    objective,
    objective_two_penalty,
    svd_init,
)
from .experiment import (
    ExperimentConfig,
    IrSource,
    MethodSpec,
    SweepRecord,
    TrueFilter,
    ar1_generate,
    embed_delay_line,
    make_true_filter,
    misalignment,
    nuclear_norm,
    rank_estimate,
    records_to_csv,
    run_sweep,
    synthesize_dataset,
    write_csv,
)
from .ridge import (
    DataSet,
    Moments,
    empirical_moments,
    press_loocv,
    ridge_solve,
    select_alpha_ridge,
)
from .tensor_ops import (
    FactorPair,
    KroneckerShape,
    StructuredFactorMatrix,
    apply_factor_matrix_transpose,
    build_factor_matrix,
    concat_factor_matrices,
    kron,
    mat,
    reconstruct,
    vec,
)

__version__ = "0.1.0"

__all__ = [
    "AloEvaluation",
    "AlphaSearchResult",
    "AlsConfig",
    "AlsResult",
    "DataSet",
    "ExperimentConfig",
    "FactorPair",
    "FilterEstimate",
    "IrSource",
    "KroneckerShape",
    "LeverageError",
    "MethodSpec",
    "Moments",
    "StructuredFactorMatrix",
    "SweepRecord",
    "TrueFilter",
    "alo_metric",
    "als_run",
    "als_subproblem",
    "apply_factor_matrix_transpose",
    "ar1_generate",
    "build_factor_matrix",
    "build_hessian_approx",
    "concat_factor_matrices",
    "embed_delay_line",
    "empirical_moments",
    "exact_lo_metric",
    "kron",
    "make_true_filter",
    "mat",
    "misalignment",
    "nuclear_norm",
    "objective",
    "objective_two_penalty",
    "press_loocv",
    "rank_estimate",
    "reconstruct",
    "records_to_csv",
    "ridge_solve",
    "run_sweep",
    "select_alpha_alo",
    "select_alpha_ridge",
    "svd_init",
    "synthesize_dataset",
    "vec",
    "write_csv",
]
