"""Directed graph types, prior handling and the edit-distance metric.

Orientation convention used across the whole package: adjacency matrices
are receiver-major.  Entry ``(i, j)`` of any dense matrix (adjacency,
prior, attention snapshot) is the weight vertex ``i`` receives from
vertex ``j``, i.e. the weight of edge ``j -> i``.  Edge tuples, JSON
files and ground-truth lists always use ``(src, dst)`` order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInputError, SizeMismatchError
from .serialize import canonical_json


@dataclass(frozen=True)
class WeightedDigraph:
    """Static weighted directed graph on vertices 0..n-1.

    Edges are (src, dst, weight) with weight > 0 and at most one edge per
    ordered pair.  Self-loops are permitted (attention keeps them); metric
    and export code drops them where documented.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        object.__setattr__(self, "edges", tuple(
            (int(s), int(d), float(w)) for s, d, w in self.edges))
        seen: set[tuple[int, int]] = set()
        for src, dst, w in self.edges:
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise ValueError(f"edge ({src},{dst}) out of range for n={self.n}")
            if w <= 0 or not np.isfinite(w):
                raise ValueError(f"edge ({src},{dst}) has non-positive weight {w}")
            if (src, dst) in seen:
                raise ValueError(f"duplicate edge ({src},{dst})")
            seen.add((src, dst))

    def edge_set(self, include_self_loops: bool = True) -> frozenset[tuple[int, int]]:
        """Ordered (src, dst) pairs present in the graph."""
        return frozenset((s, d) for s, d, _ in self.edges
                         if include_self_loops or s != d)

    def weight(self, src: int, dst: int) -> float:
        for s, d, w in self.edges:
            if s == src and d == dst:
                return w
        return 0.0

    def adjacency(self) -> np.ndarray:
        """Dense receiver-major matrix: entry (i, j) = weight of j -> i."""
        mat = np.zeros((self.n, self.n))
        for src, dst, w in self.edges:
            mat[dst, src] = w
        return mat

    @classmethod
    def from_adjacency(cls, mat: np.ndarray) -> "WeightedDigraph":
        """Inverse of adjacency(): nonzero (i, j) becomes edge j -> i."""
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise SizeMismatchError(f"adjacency must be square, got {mat.shape}")
        edges = []
        for dst in range(mat.shape[0]):
            for src in range(mat.shape[1]):
                if mat[dst, src] != 0.0:
                    edges.append((src, dst, float(mat[dst, src])))
        edges.sort()
        return cls(mat.shape[0], tuple(edges))

    def to_json_dict(self) -> dict:
        edges = sorted(self.edges)
        return {"n": self.n,
                "edges": [{"src": s, "dst": d, "weight": w} for s, d, w in edges]}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "WeightedDigraph":
        edges = tuple((e["src"], e["dst"], e["weight"]) for e in obj["edges"])
        return cls(int(obj["n"]), edges)

    def dumps(self) -> str:
        return canonical_json(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "WeightedDigraph":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class PriorGraph:
    """A candidate graph plus the set of ordered pairs allowed attention.

    ``support`` holds (src, dst) pairs.  It always contains every edge of
    the digraph and every self-loop; the constructor adds both, so any
    user-supplied support is only ever widened.
    """

    digraph: WeightedDigraph
    support: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        full = set(tuple(p) for p in self.support)
        full.update(self.digraph.edge_set())
        full.update((i, i) for i in range(self.digraph.n))
        for src, dst in full:
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise ValueError(f"support pair ({src},{dst}) out of range")
        object.__setattr__(self, "support", frozenset(full))

    @property
    def n(self) -> int:
        return self.digraph.n

    @classmethod
    def dense(cls, digraph: WeightedDigraph) -> "PriorGraph":
        """Prior whose support allows every ordered pair."""
        n = digraph.n
        allp = frozenset((i, j) for i in range(n) for j in range(n))
        return cls(digraph, allp)

    def support_mask(self) -> np.ndarray:
        """Boolean receiver-major mask: (i, j) True iff edge j -> i allowed."""
        mask = np.zeros((self.n, self.n), dtype=bool)
        for src, dst in self.support:
            mask[dst, src] = True
        return mask

    def dense_adjacency(self) -> np.ndarray:
        return self.digraph.adjacency()


@dataclass(frozen=True)
class AttentionTrajectory:
    """Time-indexed attention matrices: the dynamic graph.

    Snapshots are receiver-major.  When a support is attached, every
    snapshot must be exactly zero off-support and each row with any
    support must sum to 1 (within 1e-9).
    """

    times: tuple[float, ...]
    snapshots: tuple[np.ndarray, ...]
    support: frozenset[tuple[int, int]] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        snaps = tuple(np.asarray(s, dtype=float) for s in self.snapshots)
        object.__setattr__(self, "snapshots", snaps)
        if len(self.times) != len(snaps):
            raise SizeMismatchError("times and snapshots differ in length")
        if any(t1 >= t2 for t1, t2 in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        for s in snaps:
            if s.ndim != 2 or s.shape != snaps[0].shape or s.shape[0] != s.shape[1]:
                raise SizeMismatchError("snapshots must share a square shape")
            if np.any(s < 0) or not np.all(np.isfinite(s)):
                raise ValueError("snapshot entries must be finite and nonnegative")
        if self.support is not None and snaps:
            mask = np.zeros(snaps[0].shape, dtype=bool)
            for src, dst in self.support:
                mask[dst, src] = True
            for s in snaps:
                if np.any(s[~mask] != 0.0):
                    raise ValueError("snapshot has mass outside the support")
                rows = mask.any(axis=1)
                sums = s[rows].sum(axis=1)
                if np.any(np.abs(sums - 1.0) > 1e-9):
                    raise ValueError("supported rows must sum to 1")

    @property
    def n(self) -> int:
        return self.snapshots[0].shape[0] if self.snapshots else 0

    def to_json_dict(self) -> dict:
        return {"times": list(self.times),
                "snapshots": [WeightedDigraph.from_adjacency(s).to_json_dict()
                              for s in self.snapshots]}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "AttentionTrajectory":
        snaps = tuple(WeightedDigraph.from_json_dict(g).adjacency()
                      for g in obj["snapshots"])
        return cls(tuple(obj["times"]), snaps)

    def dumps(self) -> str:
        return canonical_json(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "AttentionTrajectory":
        return cls.from_json_dict(json.loads(text))


def graph_edit_distance(pred: WeightedDigraph, truth: WeightedDigraph) -> int:
    """Directed-edge insertions plus deletions turning pred into truth.

    Vertex identities are fixed (no relabeling) and weights are ignored;
    self-loops are excluded on both sides.
    """
    if pred.n != truth.n:
        raise SizeMismatchError(
            f"graphs differ in vertex count: {pred.n} vs {truth.n}")
    a = pred.edge_set(include_self_loops=False)
    b = truth.edge_set(include_self_loops=False)
    return len(a ^ b)


def binarize(weighted: WeightedDigraph | np.ndarray, threshold: float) -> WeightedDigraph:
    """Keep edges with weight strictly above threshold; drop self-loops.

    Accepts a digraph or a dense receiver-major snapshot.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if isinstance(weighted, WeightedDigraph):
        g = weighted
    else:
        g = WeightedDigraph.from_adjacency(np.asarray(weighted, dtype=float))
    kept = tuple((s, d, w) for s, d, w in sorted(g.edges)
                 if s != d and w > threshold)
    return WeightedDigraph(g.n, kept)


def time_average(traj: AttentionTrajectory) -> WeightedDigraph:
    """Arithmetic mean of the snapshots, returned as a digraph.

    Zero mean entries produce no edge; self-loops are kept (binarize
    drops them later).
    """
    if not traj.snapshots:
        raise EmptyInputError("cannot average an empty trajectory")
    mean = np.mean(np.stack(traj.snapshots), axis=0)
    return WeightedDigraph.from_adjacency(mean)


def prior_deviation(snapshot: np.ndarray, prior: PriorGraph) -> float:
    """Frobenius norm of (snapshot - prior adjacency)."""
    snap = np.asarray(snapshot, dtype=float)
    dense = prior.dense_adjacency()
    if snap.shape != dense.shape:
        raise SizeMismatchError(
            f"snapshot shape {snap.shape} vs prior {dense.shape}")
    return float(np.linalg.norm(snap - dense))
