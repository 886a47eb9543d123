from .galton_watson import (
    GWConfig,
    GWTrace,
    MartingaleReport,
    SurvivalEstimate,
    gw_batch,
    gw_run,
    martingale_check,
    solve_lambda,
    step_variance,
    survival_horizon_limit,
    truncated_survival,
)
from .spatial import (
    BranchingMode,
    SpatialEventEstimate,
    SpatialNode,
    SpatialRun,
    ancestral_walk_event,
    horizon,
    safe_rectangle,
    spatial_branching_run,
    spatial_event_frequency,
    target_square,
)

__all__ = [
    "GWConfig",
    "GWTrace",
    "MartingaleReport",
    "SurvivalEstimate",
    "gw_batch",
    "gw_run",
    "martingale_check",
    "solve_lambda",
    "step_variance",
    "survival_horizon_limit",
    "truncated_survival",
    "BranchingMode",
    "SpatialEventEstimate",
    "SpatialNode",
    "SpatialRun",
    "ancestral_walk_event",
    "horizon",
    "safe_rectangle",
    "spatial_branching_run",
    "spatial_event_frequency",
    "target_square",
]
