"""Elastic Net MOPSO feature selection with Pareto fusion."""

from ._core import (
    Dataset,
    EnfuseError,
    FoldPlan,
    MopsoConfig,
    SynthSpec,
    adjusted_r2,
    crowding_distances,
    extra_sum_of_squares,
    fit_elastic_net,
    fit_ols,
    fuse,
    lasso_null_lambda,
    load_split,
    make_folds,
    rmse_cv,
    run_en_grid,
    run_ga_lr,
    run_mopso,
    saw_scores,
    synth_split,
    wilcoxon,
    write_synth,
)

__all__ = [
    "Dataset",
    "EnfuseError",
    "FoldPlan",
    "MopsoConfig",
    "SynthSpec",
    "adjusted_r2",
    "crowding_distances",
    "extra_sum_of_squares",
    "fit_elastic_net",
    "fit_ols",
    "fuse",
    "lasso_null_lambda",
    "load_split",
    "make_folds",
    "rmse_cv",
    "run_en_grid",
    "run_ga_lr",
    "run_mopso",
    "saw_scores",
    "synth_split",
    "wilcoxon",
    "write_synth",
]
