"""Graph containers, edit distance (with a brute-force oracle), binarize."""

import itertools
import json
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdyn import (AttentionTrajectory, PriorGraph, SizeMismatchError,
                      WeightedDigraph, binarize, graph_edit_distance,
                      prior_deviation, time_average)
from graphdyn.errors import EmptyInputError


def toggle_distances(n: int, start: frozenset) -> dict[frozenset, int]:
    """BFS edit cost from ``start`` to every labeled digraph on n vertices.

    One move inserts or deletes a single directed non-self edge, which is
    exactly the edit model the metric claims to count.
    """
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    dist = {start: 0}
    queue = deque([start])
    while queue:
        g = queue.popleft()
        for p in pairs:
            h = g - {p} if p in g else g | {p}
            if h not in dist:
                dist[h] = dist[g] + 1
                queue.append(h)
    return dist


def from_pairs(n: int, pairs) -> WeightedDigraph:
    return WeightedDigraph(n, tuple((s, d, 1.0) for s, d in sorted(pairs)))


class TestGraphEditDistance:
    def test_identical_graphs(self):
        g = from_pairs(3, [(0, 1), (1, 2)])
        assert graph_edit_distance(g, g) == 0

    def test_counting_example(self):
        pred = from_pairs(4, [(0, 1), (1, 2), (2, 3)])
        truth = from_pairs(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
        assert graph_edit_distance(pred, truth) == 2

    def test_disjoint_edge_sets(self):
        pred = from_pairs(4, [(0, 1), (1, 2)])
        truth = from_pairs(4, [(2, 3), (3, 0), (0, 2)])
        assert graph_edit_distance(pred, truth) == 5

    def test_self_loops_excluded(self):
        pred = WeightedDigraph(3, ((0, 0, 1.0), (0, 1, 1.0)))
        truth = WeightedDigraph(3, ((0, 1, 1.0), (2, 2, 1.0)))
        assert graph_edit_distance(pred, truth) == 0

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            graph_edit_distance(from_pairs(3, []), from_pairs(4, []))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("reference", ["empty", "cycle", "dense"])
    def test_matches_bfs_oracle_exhaustively(self, n, reference):
        # every labeled digraph on n vertices against a fixed reference
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        if reference == "empty":
            ref: frozenset = frozenset()
        elif reference == "cycle":
            ref = frozenset((i, (i + 1) % n) for i in range(n) if n > 1)
        else:
            ref = frozenset(pairs[::2])
        dist = toggle_distances(n, ref)
        ref_graph = from_pairs(n, ref)
        for bits in itertools.product([False, True], repeat=len(pairs)):
            edges = frozenset(p for p, b in zip(pairs, bits) if b)
            expected = dist[edges]
            assert graph_edit_distance(from_pairs(n, edges),
                                       ref_graph) == expected

    @given(st.integers(2, 5), st.data())
    @settings(max_examples=150, deadline=None)
    def test_metric_properties(self, n, data):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        pick = st.lists(st.sampled_from(pairs), unique=True)
        a = from_pairs(n, data.draw(pick))
        b = from_pairs(n, data.draw(pick))
        c = from_pairs(n, data.draw(pick))
        dab = graph_edit_distance(a, b)
        assert dab == graph_edit_distance(b, a)
        assert dab >= 0
        assert (dab == 0) == (a.edge_set() == b.edge_set())
        assert dab <= graph_edit_distance(a, c) + graph_edit_distance(c, b)


class TestWeightedDigraph:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            WeightedDigraph(2, ((0, 2, 1.0),))

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError, match="weight"):
            WeightedDigraph(2, ((0, 1, 0.0),))
        with pytest.raises(ValueError, match="weight"):
            WeightedDigraph(2, ((0, 1, float("nan")),))

    def test_rejects_duplicate_edge(self):
        with pytest.raises(ValueError, match="duplicate"):
            WeightedDigraph(2, ((0, 1, 1.0), (0, 1, 2.0)))

    def test_adjacency_is_receiver_major(self):
        g = WeightedDigraph(3, ((0, 2, 5.0),))
        mat = g.adjacency()
        assert mat[2, 0] == 5.0
        assert mat.sum() == 5.0

    def test_adjacency_round_trip(self):
        g = WeightedDigraph(4, ((0, 1, 0.5), (2, 2, 1.0), (3, 0, 2.0)))
        assert WeightedDigraph.from_adjacency(g.adjacency()) == g

    def test_json_round_trip_byte_stable(self):
        g = WeightedDigraph(3, ((0, 1, 1 / 3), (2, 0, np.pi)))
        text = g.dumps()
        again = WeightedDigraph.loads(text)
        assert again == g
        assert again.dumps() == text

    def test_json_shape(self):
        g = WeightedDigraph(2, ((0, 1, 2.0),))
        obj = json.loads(g.dumps())
        assert obj == {"n": 2, "edges": [{"src": 0, "dst": 1, "weight": 2}]}

    def test_weight_lookup(self):
        g = WeightedDigraph(3, ((0, 1, 0.25),))
        assert g.weight(0, 1) == 0.25
        assert g.weight(1, 0) == 0.0


class TestPriorGraph:
    def test_support_includes_edges_and_self_loops(self):
        prior = PriorGraph(from_pairs(3, [(0, 1)]))
        assert (0, 1) in prior.support
        assert all((i, i) in prior.support for i in range(3))
        assert (1, 0) not in prior.support

    def test_user_support_only_widened(self):
        prior = PriorGraph(from_pairs(2, [(0, 1)]), frozenset({(1, 0)}))
        assert {(0, 1), (1, 0), (0, 0), (1, 1)} <= prior.support

    def test_support_mask_receiver_major(self):
        prior = PriorGraph(from_pairs(3, [(0, 2)]))
        mask = prior.support_mask()
        assert mask[2, 0]
        assert not mask[0, 2]
        assert mask.trace() == 3

    def test_dense(self):
        prior = PriorGraph.dense(WeightedDigraph(3))
        assert prior.support_mask().all()

    def test_out_of_range_support(self):
        with pytest.raises(ValueError):
            PriorGraph(WeightedDigraph(2), frozenset({(0, 5)}))


class TestAttentionTrajectory:
    def _row_normalized(self, n, rng):
        m = rng.random((n, n)) + 0.05
        return m / m.sum(axis=1, keepdims=True)

    def test_valid_trajectory(self):
        rng = np.random.default_rng(0)
        snaps = (self._row_normalized(3, rng), self._row_normalized(3, rng))
        support = frozenset((i, j) for i in range(3) for j in range(3))
        traj = AttentionTrajectory((0.0, 1.0), snaps, support)
        assert traj.n == 3

    def test_rejects_mass_off_support(self):
        snap = np.array([[0.5, 0.5], [0.0, 1.0]])
        support = frozenset({(0, 0), (1, 1)})  # column 1 row 0 not allowed
        with pytest.raises(ValueError, match="outside the support"):
            AttentionTrajectory((0.0,), (snap,), support)

    def test_rejects_bad_row_sum(self):
        snap = np.array([[0.7, 0.2], [0.5, 0.5]])
        support = frozenset({(0, 0), (1, 0), (0, 1), (1, 1)})
        with pytest.raises(ValueError, match="sum to 1"):
            AttentionTrajectory((0.0,), (snap,), support)

    def test_rejects_unordered_times(self):
        snap = np.eye(2)
        with pytest.raises(ValueError, match="increasing"):
            AttentionTrajectory((1.0, 0.0), (snap, snap))

    def test_json_round_trip(self):
        snaps = (np.array([[0.0, 1.0], [0.5, 0.5]]),)
        traj = AttentionTrajectory((2.0,), snaps)
        again = AttentionTrajectory.loads(traj.dumps())
        assert again.times == traj.times
        np.testing.assert_array_equal(again.snapshots[0], traj.snapshots[0])
        assert again.dumps() == traj.dumps()


class TestBinarizeAndAverage:
    def test_binarize_threshold_strict(self):
        g = WeightedDigraph(3, ((0, 1, 0.1), (1, 2, 0.100001), (2, 0, 0.5)))
        kept = binarize(g, 0.1)
        assert kept.edge_set() == {(1, 2), (2, 0)}

    def test_binarize_drops_self_loops(self):
        g = WeightedDigraph(2, ((0, 0, 9.0), (0, 1, 9.0)))
        assert binarize(g, 0.5).edge_set() == {(0, 1)}

    def test_binarize_accepts_matrix(self):
        snap = np.array([[0.0, 0.9], [0.2, 0.0]])
        kept = binarize(snap, 0.5)
        # receiver-major input: entry (0, 1) is the edge 1 -> 0
        assert kept.edge_set() == {(1, 0)}

    def test_binarize_rejects_negative_threshold(self):
        with pytest.raises(ValueError):
            binarize(WeightedDigraph(1), -0.1)

    def test_time_average(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        b = np.array([[0.0, 0.5], [0.0, 1.0]])
        traj = AttentionTrajectory((0.0, 1.0), (a, b))
        avg = time_average(traj)
        np.testing.assert_allclose(avg.adjacency(),
                                   np.array([[0.0, 0.75], [0.5, 0.5]]))

    def test_time_average_empty(self):
        with pytest.raises(EmptyInputError):
            time_average(AttentionTrajectory((), ()))

    def test_prior_deviation(self):
        prior = PriorGraph(from_pairs(2, [(0, 1)]))
        snap = prior.dense_adjacency()
        assert prior_deviation(snap, prior) == 0.0
        bumped = snap.copy()
        bumped[0, 0] += 3.0
        assert prior_deviation(bumped, prior) == pytest.approx(3.0)

    def test_prior_deviation_shape_mismatch(self):
        with pytest.raises(SizeMismatchError):
            prior_deviation(np.zeros((3, 3)), PriorGraph(WeightedDigraph(2)))
