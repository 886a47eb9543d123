from .dsu import DisjointSet
from .induced_paths import InducedPathEstimate, induced_path_expectation, subcritical_alpha
from .percgraph import (
    ClusterStats,
    PercGraph,
    brute_force_components,
    build_graph,
    cluster_stats,
    component_labels,
    expected_degree,
    scale_field,
)

__all__ = [
    "DisjointSet",
    "InducedPathEstimate",
    "induced_path_expectation",
    "subcritical_alpha",
    "ClusterStats",
    "PercGraph",
    "brute_force_components",
    "build_graph",
    "cluster_stats",
    "component_labels",
    "expected_degree",
    "scale_field",
]
