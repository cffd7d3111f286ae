"""Multi-view one-class classification: SVDD, OC-SVM and subspace variants."""

from ._core import (
    ConfigError,
    DegenerateKernelError,
    Error,
    InfeasibleError,
    OracleScaleError,
    ParameterError,
    ParseError,
    ShapeError,
    SvddModel,
    compute_metrics,
    cross_validate,
    fit_svdd,
    gen_two_view,
    gram_matrix,
    npt_embed,
    run_cli,
    stratified_folds,
    svdd_bruteforce,
)

__all__ = [
    "ConfigError",
    "DegenerateKernelError",
    "Error",
    "InfeasibleError",
    "OracleScaleError",
    "ParameterError",
    "ParseError",
    "ShapeError",
    "SvddModel",
    "compute_metrics",
    "cross_validate",
    "fit_svdd",
    "gen_two_view",
    "gram_matrix",
    "npt_embed",
    "run_cli",
    "stratified_folds",
    "svdd_bruteforce",
]
