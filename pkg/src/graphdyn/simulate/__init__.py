"""Ground-truth dynamical-system simulators."""

from .dmf import DmfConfig, dmf_drift, dmf_transfer, simulate_dmf
from .five_node import GROUND_TRUTH_EDGES, FiveNodeConfig, simulate_five_node
from .iaf import IafConfig, ParamChange, simulate_iaf_network
from .networks import LabeledDigraph, random_network
from .wilson_cowan import (WilsonCowanConfig, activation, simulate_wilson_cowan,
                           wilson_cowan_rhs)

__all__ = [
    "DmfConfig", "dmf_drift", "dmf_transfer", "simulate_dmf",
    "FiveNodeConfig", "GROUND_TRUTH_EDGES", "simulate_five_node",
    "IafConfig", "ParamChange", "simulate_iaf_network",
    "LabeledDigraph", "random_network",
    "WilsonCowanConfig", "activation", "simulate_wilson_cowan",
    "wilson_cowan_rhs",
]
