"""Random directed networks with excitatory/inhibitory vertex labels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..graphs import WeightedDigraph


@dataclass(frozen=True)
class LabeledDigraph:
    """A digraph whose vertices carry an excitatory (True) / inhibitory label.

    Edge weights stay positive; the label of the *source* vertex decides
    the sign of its outgoing influence.
    """

    digraph: WeightedDigraph
    excitatory: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.excitatory) != self.digraph.n:
            raise ValueError("one label per vertex required")
        object.__setattr__(self, "excitatory", tuple(bool(b) for b in self.excitatory))

    @property
    def n(self) -> int:
        return self.digraph.n

    def signed_adjacency(self) -> np.ndarray:
        """Receiver-major matrix with column j negated when j is inhibitory."""
        signs = np.where(np.array(self.excitatory), 1.0, -1.0)
        return self.digraph.adjacency() * signs[None, :]


def random_network(n: int, edge_probability: float, fraction_excitatory: float,
                   seed: int) -> LabeledDigraph:
    """Directed Erdos-Renyi graph without self-loops, unit weights.

    The first ceil(fraction_excitatory * n) vertices are excitatory, the
    rest inhibitory.  Same arguments -> identical graph.
    """
    if not 0.0 <= edge_probability <= 1.0:
        raise ValueError("edge_probability must lie in [0, 1]")
    if not 0.0 <= fraction_excitatory <= 1.0:
        raise ValueError("fraction_excitatory must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    edges = []
    for src in range(n):
        for dst in range(n):
            if src != dst and draws[src, dst] < edge_probability:
                edges.append((src, dst, 1.0))
    n_ex = math.ceil(fraction_excitatory * n)
    labels = tuple(i < n_ex for i in range(n))
    return LabeledDigraph(WeightedDigraph(n, tuple(edges)), labels)
