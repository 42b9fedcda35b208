"""Graph-informed dynamics learning and graph inference for time series.

The package has three layers:

  * data and graph containers (`data`, `graphs`, `serialize`),
  * simulators that generate benchmark systems (`simulate`),
  * inference: an attention-over-graph ODE model (`model`) plus
    classical baselines (`baselines`), compared by `bench`.

Everything that touches adjacency matrices uses the receiver-major
convention: entry (i, j) is the weight of the edge j -> i.  Edge lists
and JSON stay (source, destination, weight).
"""

from . import autodiff
from .baselines import (EntropyEstimatorConfig, SignificanceConfig,
                        conditional_entropy, entropy, granger_graph,
                        mmi_graph, mte_graph, oce_graph, pc_graph,
                        permutation_significance)
from .data import (Dataset, MultivariateTimeSeries, PerturbationRecord,
                   apply_perturbation, lag_window, load_dataset, save_dataset,
                   split_holdout)
from .errors import (CollinearityError, ConfigurationError, DataFormatError,
                     DegenerateDataError, DivergenceError, EmptyInputError,
                     ExtrapolationError, GraphDynError, GridAlignmentError,
                     InsufficientDataError, SimulationBlowUpError,
                     SizeMismatchError)
from .graphs import (AttentionTrajectory, PriorGraph, WeightedDigraph,
                     binarize, graph_edit_distance, prior_deviation,
                     time_average)
from .model import (TrainConfig, TrainedModel, compute_attention,
                    composite_loss, extract_graphs, hysteresis_index,
                    load_model, map_energy, predict, save_model,
                    sensitivity_check, train)
from .simulate import (DmfConfig, FiveNodeConfig, IafConfig, LabeledDigraph,
                       ParamChange, WilsonCowanConfig, random_network,
                       simulate_dmf, simulate_five_node, simulate_iaf_network,
                       simulate_wilson_cowan)

__version__ = "0.1.0"

__all__ = [
    "AttentionTrajectory",
    "CollinearityError",
    "ConfigurationError",
    "DataFormatError",
    "Dataset",
    "DegenerateDataError",
    "DivergenceError",
    "DmfConfig",
    "EmptyInputError",
    "EntropyEstimatorConfig",
    "ExtrapolationError",
    "FiveNodeConfig",
    "GraphDynError",
    "GridAlignmentError",
    "IafConfig",
    "InsufficientDataError",
    "LabeledDigraph",
    "MultivariateTimeSeries",
    "ParamChange",
    "PerturbationRecord",
    "PriorGraph",
    "SignificanceConfig",
    "SimulationBlowUpError",
    "SizeMismatchError",
    "TrainConfig",
    "TrainedModel",
    "WeightedDigraph",
    "WilsonCowanConfig",
    "apply_perturbation",
    "autodiff",
    "binarize",
    "composite_loss",
    "compute_attention",
    "conditional_entropy",
    "entropy",
    "extract_graphs",
    "granger_graph",
    "graph_edit_distance",
    "hysteresis_index",
    "lag_window",
    "load_dataset",
    "load_model",
    "map_energy",
    "mmi_graph",
    "mte_graph",
    "oce_graph",
    "pc_graph",
    "permutation_significance",
    "predict",
    "prior_deviation",
    "random_network",
    "save_dataset",
    "save_model",
    "sensitivity_check",
    "simulate_dmf",
    "simulate_five_node",
    "simulate_iaf_network",
    "simulate_wilson_cowan",
    "split_holdout",
    "time_average",
    "train",
]
