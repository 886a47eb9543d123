from .annulus import Annulus, Norm, area, area_to_radius, contains, lower_bound_nc, norm_of, sample_annulus
from .overlap import (
    FunctionalEstimate,
    IntervalIntegral,
    OverlapExtremum,
    OverlapMethod,
    OverlapReport,
    cluster_overlap_area,
    intersection_area,
    interval_overlap_integral,
    lemma3_functional,
    min_overlap_ratio,
    overlap_kernel,
    overlap_mc,
    square_overlap_integral,
    square_six_term_bound,
    sup_overlap_scaled,
    theorem5_rigorous,
    theorem5_threshold,
)

__all__ = [
    "Annulus",
    "Norm",
    "area",
    "area_to_radius",
    "contains",
    "lower_bound_nc",
    "norm_of",
    "sample_annulus",
    "FunctionalEstimate",
    "IntervalIntegral",
    "OverlapExtremum",
    "OverlapMethod",
    "OverlapReport",
    "cluster_overlap_area",
    "intersection_area",
    "interval_overlap_integral",
    "lemma3_functional",
    "min_overlap_ratio",
    "overlap_kernel",
    "overlap_mc",
    "square_overlap_integral",
    "square_six_term_bound",
    "sup_overlap_scaled",
    "theorem5_rigorous",
    "theorem5_threshold",
]
