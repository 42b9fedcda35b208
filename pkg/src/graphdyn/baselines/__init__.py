"""Classical graph-inference baselines over pooled time-series samples."""

from .entropy import (EntropyEstimatorConfig, conditional_entropy, entropy,
                      entropy_from_covariance, gaussian_entropy, knn_entropy)
from .granger import granger_graph
from .infoflow import mmi_graph, mte_graph, oce_graph, pooled_lag_matrices
from .pc import fisher_z_pvalue, pc_graph
from .significance import SignificanceConfig, permutation_significance

__all__ = [
    "EntropyEstimatorConfig",
    "SignificanceConfig",
    "conditional_entropy",
    "entropy",
    "entropy_from_covariance",
    "fisher_z_pvalue",
    "gaussian_entropy",
    "granger_graph",
    "knn_entropy",
    "mmi_graph",
    "mte_graph",
    "oce_graph",
    "pc_graph",
    "permutation_significance",
    "pooled_lag_matrices",
]
