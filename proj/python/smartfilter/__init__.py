"""Python bindings for the smartfilter benchmark-filtering engine."""

from ._smartfilter import (
    SmartFilterError,
    build_clusters,
    cosine_distance,
    kde_threshold,
    kendall_tau_b,
    knn_pairs,
    pearson,
    run_cli,
    run_filter,
    silverman_bandwidth,
)

__all__ = [
    "SmartFilterError",
    "build_clusters",
    "cosine_distance",
    "kde_threshold",
    "kendall_tau_b",
    "knn_pairs",
    "pearson",
    "run_cli",
    "run_filter",
    "silverman_bandwidth",
]
