"""Offline change point detection by maximizing the cross-entropy between
adjacent segments, solved exactly with dynamic programming, plus the classic
sum-of-costs baselines, BIC penalty selection, evaluation metrics, and a
small data pipeline."""

from .baselines import (
    WsScoreSeries,
    binary_segmentation,
    classic_objective_value,
    optimal_partitioning,
    peak_detect,
    window_sliding_scores,
)
from .core import Constraints, Segmentation, TimeSeries, satisfies, segments
from .costs import PairwiseCostCache, SegmentCostCache
from .data import (
    StftConfig,
    SyntheticSpec,
    daily_average,
    minmax_scale,
    read_csv,
    stft_features,
    subsample,
    synth_piecewise_gaussian,
    synth_piecewise_var,
    write_csv,
)
from .metrics import (
    MetricsReport,
    annotation_error,
    evaluate_segmentations,
    hausdorff,
    mean_distance,
    precision_recall_f1,
    rand_index,
)
from .models import (
    GaussianSpec,
    VarSpec,
    avg_loglik,
    fit,
    min_fit_length,
    nce_cost,
    segment_nll_cost,
    spec_from_json,
    spec_to_json,
)
from .selection import BetaGrid, SelectionResult, bic, default_beta_grid, select_beta
from .solver import (
    DpState,
    SolveResult,
    SolverConfig,
    admissible_candidates,
    bellman_residual,
    brute_force_solve,
    count_cost_eval_terms,
    count_cost_evals,
    enumerate_segmentations,
    objective_value,
    solve,
    solve_with_state,
)

__all__ = [
    "BetaGrid",
    "Constraints",
    "DpState",
    "GaussianSpec",
    "MetricsReport",
    "PairwiseCostCache",
    "SegmentCostCache",
    "Segmentation",
    "SelectionResult",
    "SolveResult",
    "SolverConfig",
    "StftConfig",
    "SyntheticSpec",
    "TimeSeries",
    "VarSpec",
    "WsScoreSeries",
    "admissible_candidates",
    "annotation_error",
    "avg_loglik",
    "bellman_residual",
    "bic",
    "binary_segmentation",
    "brute_force_solve",
    "classic_objective_value",
    "count_cost_eval_terms",
    "count_cost_evals",
    "daily_average",
    "default_beta_grid",
    "enumerate_segmentations",
    "evaluate_segmentations",
    "fit",
    "hausdorff",
    "mean_distance",
    "min_fit_length",
    "minmax_scale",
    "nce_cost",
    "objective_value",
    "optimal_partitioning",
    "peak_detect",
    "precision_recall_f1",
    "rand_index",
    "read_csv",
    "satisfies",
    "segment_nll_cost",
    "segments",
    "select_beta",
    "solve",
    "solve_with_state",
    "spec_from_json",
    "spec_to_json",
    "stft_features",
    "subsample",
    "synth_piecewise_gaussian",
    "synth_piecewise_var",
    "window_sliding_scores",
    "write_csv",
]
