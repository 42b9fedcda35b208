"""Constraint-based structure learning: Fisher-z tests, skeleton,
collider orientation, acyclicity."""

import numpy as np
import pytest

from graphdyn.baselines.pc import fisher_z_pvalue, pc_graph
from graphdyn.data import Dataset, MultivariateTimeSeries
from graphdyn.errors import CollinearityError, InsufficientDataError


def dataset_from(values: np.ndarray) -> Dataset:
    times = np.arange(values.shape[0], dtype=float)
    return Dataset((MultivariateTimeSeries(times, values),))


def collider_data(m: int = 2000, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(m)
    y = rng.standard_normal(m)
    z = x + y + 0.5 * rng.standard_normal(m)
    return dataset_from(np.stack([x, y, z], axis=1))


def chain_data(m: int = 2000, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(m)
    y = 0.8 * x + 0.6 * rng.standard_normal(m)
    z = 0.8 * y + 0.6 * rng.standard_normal(m)
    return dataset_from(np.stack([x, y, z], axis=1))


def directed_only(graph) -> set[tuple[int, int]]:
    """Edges asserted in one direction only (bidirected = undirected)."""
    edges = graph.edge_set()
    return {(i, j) for i, j in edges if (j, i) not in edges}


def has_directed_cycle(edges: set[tuple[int, int]], n: int) -> bool:
    color = [0] * n

    def visit(u: int) -> bool:
        color[u] = 1
        for a, b in edges:
            if a == u:
                if color[b] == 1:
                    return True
                if color[b] == 0 and visit(b):
                    return True
        color[u] = 2
        return False

    return any(color[v] == 0 and visit(v) for v in range(n))


class TestFisherZ:
    def test_exact_conditional_independence_gives_p_one(self):
        # population chain: partial corr of (x, z) given y is exactly zero
        corr = np.array([[1.0, 0.8, 0.64],
                         [0.8, 1.0, 0.8],
                         [0.64, 0.8, 1.0]])
        p = fisher_z_pvalue(corr, m=2000, i=0, j=2, cond=(1,))
        assert p == pytest.approx(1.0, abs=1e-9)

    def test_marginal_dependence_gives_tiny_p(self):
        corr = np.array([[1.0, 0.8, 0.64],
                         [0.8, 1.0, 0.8],
                         [0.64, 0.8, 1.0]])
        p = fisher_z_pvalue(corr, m=2000, i=0, j=2, cond=())
        assert p < 1e-12

    def test_collider_conditioning_induces_dependence(self):
        # x, y independent; conditioning on their sum makes them
        # anticorrelated: partial corr = -1/(1+s) with noise variance s
        s = 1.0
        rho = 1.0 / np.sqrt(2.0 + s)
        corr = np.array([[1.0, 0.0, rho],
                         [0.0, 1.0, rho],
                         [rho, rho, 1.0]])
        p_marg = fisher_z_pvalue(corr, m=500, i=0, j=1, cond=())
        p_cond = fisher_z_pvalue(corr, m=500, i=0, j=1, cond=(2,))
        assert p_marg == pytest.approx(1.0, abs=1e-9)
        assert p_cond < 1e-12

    def test_insufficient_samples_rejected(self):
        corr = np.eye(4)
        with pytest.raises(InsufficientDataError):
            fisher_z_pvalue(corr, m=4, i=0, j=1, cond=(2, 3))

    def test_singular_submatrix_rejected(self):
        corr = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(CollinearityError):
            fisher_z_pvalue(corr, m=100, i=0, j=1, cond=())


class TestPcGraph:
    def test_collider_oriented(self):
        g = pc_graph(collider_data(), alpha=0.05)
        assert g.edge_set() == {(0, 2), (1, 2)}

    def test_chain_skeleton_without_false_collider(self):
        # y separates x and z, so no v-structure forms; both edges stay
        # undirected and export as bidirected pairs
        g = pc_graph(chain_data(), alpha=0.05)
        assert g.edge_set() == {(0, 1), (1, 0), (1, 2), (2, 1)}

    def test_independent_variables_empty(self):
        rng = np.random.default_rng(7)
        g = pc_graph(dataset_from(rng.standard_normal((2000, 3))),
                     alpha=0.01)
        assert g.edge_set() == set()

    def test_collider_vs_chain_across_seeds(self):
        for seed in range(3):
            gc = pc_graph(collider_data(seed=seed), alpha=0.05)
            gh = pc_graph(chain_data(seed=seed), alpha=0.05)
            assert gc.edge_set() == {(0, 2), (1, 2)}, f"collider seed {seed}"
            assert gh.edge_set() == {(0, 1), (1, 0), (1, 2), (2, 1)}, \
                f"chain seed {seed}"

    def test_no_directed_cycles_on_random_data(self):
        for seed in range(6):
            rng = np.random.default_rng(seed)
            m, n = 300, 5
            values = rng.standard_normal((m, n))
            # random linear structure to provoke edges
            for _ in range(4):
                a, b = rng.integers(0, n, size=2)
                if a != b:
                    values[:, b] += 0.7 * values[:, a]
            g = pc_graph(dataset_from(values), alpha=0.05)
            assert not has_directed_cycle(directed_only(g), n), f"seed {seed}"

    def test_max_condition_zero_keeps_marginal_edges(self):
        # without conditioning, the indirect x-z correlation survives
        g = pc_graph(chain_data(), alpha=0.05, max_condition=0)
        assert (0, 2) in g.edge_set() or (2, 0) in g.edge_set()

    def test_deterministic(self):
        a = pc_graph(collider_data(), alpha=0.05)
        b = pc_graph(collider_data(), alpha=0.05)
        assert a.edges == b.edges

    def test_pooling_across_series(self):
        rng = np.random.default_rng(11)

        def half(seed):
            r = np.random.default_rng(seed)
            x = r.standard_normal(1000)
            y = r.standard_normal(1000)
            z = x + y + 0.5 * r.standard_normal(1000)
            return np.stack([x, y, z], axis=1)

        s1 = MultivariateTimeSeries(np.arange(1000.0), half(1))
        s2 = MultivariateTimeSeries(np.arange(1000.0), half(2))
        g = pc_graph(Dataset((s1, s2)), alpha=0.05)
        assert g.edge_set() == {(0, 2), (1, 2)}

    def test_directed_edges_carry_unit_weight(self):
        g = pc_graph(collider_data(), alpha=0.05)
        assert all(w == 1.0 for _, _, w in g.edges)
