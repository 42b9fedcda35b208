"""Simulators: recurrence oracle, decay/fixed-point/limit checks, seeding."""

import math

import numpy as np
import pytest
from scipy.optimize import fsolve

from graphdyn.data import PerturbationRecord
from graphdyn.errors import ConfigurationError
from graphdyn.graphs import WeightedDigraph
from graphdyn.simulate import (DmfConfig, FiveNodeConfig, IafConfig,
                               LabeledDigraph, ParamChange, WilsonCowanConfig,
                               dmf_drift, dmf_transfer, random_network,
                               simulate_dmf, simulate_five_node,
                               simulate_iaf_network, simulate_wilson_cowan)

R2 = math.sqrt(2.0)


def five_node_oracle(T: int, initial) -> np.ndarray:
    """Clean-room recurrence: plain scalar loop, no shared code."""
    x = np.zeros((T, 5))
    x[:4] = initial
    for t in range(3, T - 1):
        x[t + 1, 0] = x[t, 0] + 0.95 * R2 * x[t - 1, 0] - 0.9025 * x[t - 2, 0]
        x[t + 1, 1] = x[t, 1] + 0.5 * x[t - 2, 0] ** 2
        x[t + 1, 2] = x[t, 2] - 0.4 * x[t - 3, 0]
        x[t + 1, 3] = (x[t, 3] - 0.5 * x[t - 2, 0] ** 2
                       + 0.5 * R2 * x[t - 1, 3] + 0.25 * R2 * x[t - 1, 4])
        x[t + 1, 4] = x[t, 4] - 0.5 * R2 * x[t - 1, 3] + 0.5 * R2 * x[t - 1, 4]
    return x


class TestFiveNode:
    def test_matches_independent_recurrence_100_steps(self):
        initial = (0.1, 0.05, -0.2, 0.3, -0.1)
        ds = simulate_five_node(FiveNodeConfig(steps=100, noise_sigma=0.0,
                                               initial=initial))
        expected = five_node_oracle(100, initial)
        # values grow to ~1e16; compare relative to the running scale
        scale = np.maximum(1.0, np.abs(expected))
        assert np.max(np.abs(ds.series[0].values - expected) / scale) < 1e-12

    def test_ground_truth_edges(self):
        ds = simulate_five_node(FiveNodeConfig(steps=10))
        assert ds.ground_truth.edge_set() == {(0, 1), (0, 2), (0, 3),
                                              (3, 4), (4, 3)}

    def test_zero_noise_zero_initial_stays_zero(self):
        ds = simulate_five_node(FiveNodeConfig(steps=20, noise_sigma=0.0))
        assert np.all(ds.series[0].values == 0.0)

    def test_same_seed_identical(self):
        cfg = FiveNodeConfig(steps=15, noise_sigma=0.05, seed=3)
        a = simulate_five_node(cfg)
        b = simulate_five_node(cfg)
        np.testing.assert_array_equal(a.series[0].values, b.series[0].values)

    def test_warmup_rows_hold_initials(self):
        initial = (1.0, 2.0, 3.0, 4.0, 5.0)
        ds = simulate_five_node(FiveNodeConfig(steps=8, noise_sigma=0.05,
                                               initial=initial))
        np.testing.assert_array_equal(ds.series[0].values[:4],
                                      np.tile(initial, (4, 1)))

    def test_replicates_use_independent_noise_streams(self):
        cfg = FiveNodeConfig(steps=12, noise_sigma=0.1, seed=0,
                             replicate_sigmas=(0.1,))
        ds = simulate_five_node(cfg)
        a, b = ds.series[0].values, ds.series[1].values
        assert not np.array_equal(a[4:], b[4:])

    def test_injection_isolated_from_noise_stream(self):
        # same series with and without an injection: identical before the
        # injection time, different after; the noise draws are unchanged
        rec = PerturbationRecord(vertex=0, time=6.0, epsilon=0.5)
        base = FiveNodeConfig(steps=12, noise_sigma=0.1, seed=5)
        with_inj = FiveNodeConfig(steps=12, noise_sigma=0.1, seed=5,
                                  perturbations=((0, rec),))
        a = simulate_five_node(base).series[0].values
        b = simulate_five_node(with_inj).series[0].values
        np.testing.assert_array_equal(a[:6], b[:6])
        assert b[6, 0] - a[6, 0] == pytest.approx(0.5)
        assert not np.array_equal(a[7:], b[7:])

    def test_perturbation_records_attached(self):
        rec = PerturbationRecord(vertex=3, time=6.0, epsilon=0.5)
        ds = simulate_five_node(FiveNodeConfig(
            steps=12, replicate_sigmas=(0.05,), perturbations=((1, rec),)))
        assert ds.perturbations == {1: (rec,)}
        assert ds.is_perturbed(1) and not ds.is_perturbed(0)

    def test_off_grid_perturbation_rejected(self):
        rec = PerturbationRecord(vertex=0, time=5.5, epsilon=0.1)
        with pytest.raises(ConfigurationError):
            simulate_five_node(FiveNodeConfig(steps=12, perturbations=((0, rec),)))

    def test_too_few_steps_rejected(self):
        with pytest.raises(ConfigurationError):
            FiveNodeConfig(steps=3)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ConfigurationError):
            FiveNodeConfig(steps=10, noise_sigma=-0.1)


def chain_network(n: int = 2) -> LabeledDigraph:
    g = WeightedDigraph(n, tuple((i, i + 1, 1.0) for i in range(n - 1)))
    return LabeledDigraph(g, (True,) * n)


class TestWilsonCowan:
    def test_zero_coupling_decays_exponentially(self):
        net = LabeledDigraph(WeightedDigraph(3, ()), (True, True, True))
        taus = (1.0, 2.0, 4.0)
        cfg = WilsonCowanConfig(coupling=net, steps=100, dt=0.05,
                                taus=taus, thresholds=0.0,
                                initial=(0.8, -0.5, 0.3))
        ds = simulate_wilson_cowan(cfg)
        t = ds.series[0].times
        for v, tau in enumerate(taus):
            expected = cfg.initial[v] * np.exp(-t / tau)
            np.testing.assert_allclose(ds.series[0].values[:, v], expected,
                                       atol=1e-8)

    def test_fixed_point_stays_put(self):
        net = LabeledDigraph(WeightedDigraph(2, ((0, 1, 1.0), (1, 0, 1.0))),
                             (True, False))
        cfg = WilsonCowanConfig(coupling=net, steps=50, dt=0.05,
                                thresholds=0.1, steepness=4.0)
        signed = net.signed_adjacency()

        def rhs(r):
            from graphdyn.simulate.wilson_cowan import wilson_cowan_rhs
            return wilson_cowan_rhs(r, signed, np.ones(2), np.full(2, 0.1),
                                    np.ones(2), 4.0)
        root = fsolve(rhs, np.zeros(2), full_output=False)
        assert np.max(np.abs(rhs(root))) < 1e-10
        ds = simulate_wilson_cowan(
            WilsonCowanConfig(coupling=net, steps=50, dt=0.05, thresholds=0.1,
                              steepness=4.0, initial=tuple(root)))
        np.testing.assert_allclose(ds.series[0].values,
                                   np.tile(root, (51, 1)), atol=1e-9)

    def test_uncoupled_vertices_independent(self):
        net = LabeledDigraph(WeightedDigraph(2, ()), (True, True))
        a = simulate_wilson_cowan(WilsonCowanConfig(
            coupling=net, steps=40, dt=0.05, initial=(0.5, 0.2)))
        b = simulate_wilson_cowan(WilsonCowanConfig(
            coupling=net, steps=40, dt=0.05, initial=(0.5, -0.9)))
        np.testing.assert_array_equal(a.series[0].values[:, 0],
                                      b.series[0].values[:, 0])

    def test_rk4_fourth_order_convergence(self):
        net = LabeledDigraph(WeightedDigraph(2, ((0, 1, 1.0), (1, 0, 1.0))),
                             (True, False))

        def end_state(dt, steps):
            cfg = WilsonCowanConfig(coupling=net, steps=steps, dt=dt,
                                    initial=(0.4, -0.2), thresholds=0.05)
            return simulate_wilson_cowan(cfg).series[0].values[-1]

        ref = end_state(1.0 / 640, 640)        # dt/64 reference
        err_h = np.linalg.norm(end_state(1.0 / 10, 10) - ref)
        err_h2 = np.linalg.norm(end_state(1.0 / 20, 20) - ref)
        assert 8.0 <= err_h / err_h2 <= 32.0

    def test_ground_truth_is_coupling_support(self):
        net = chain_network(3)
        ds = simulate_wilson_cowan(WilsonCowanConfig(coupling=net, steps=5,
                                                     dt=0.05))
        assert ds.ground_truth.edge_set() == {(0, 1), (1, 2)}

    def test_dt_bounded_by_tau(self):
        with pytest.raises(ConfigurationError):
            WilsonCowanConfig(coupling=chain_network(), steps=10, dt=0.2,
                              taus=1.0)

    def test_determinism_with_random_initial(self):
        net = chain_network(3)
        a = simulate_wilson_cowan(WilsonCowanConfig(coupling=net, steps=10,
                                                    dt=0.05, seed=7))
        b = simulate_wilson_cowan(WilsonCowanConfig(coupling=net, steps=10,
                                                    dt=0.05, seed=7))
        np.testing.assert_array_equal(a.series[0].values, b.series[0].values)


class TestDmf:
    def test_transfer_limit_at_removable_singularity(self):
        # at a*x == b the ratio u/(1 - exp(-d*u)) tends to 1/d
        a, b, d = 270.0, 108.0, 0.154
        assert dmf_transfer(b / a, a, b, d) == pytest.approx(1.0 / d, rel=1e-9)

    def test_transfer_continuous_near_singularity(self):
        a, b, d = 270.0, 108.0, 0.154
        x0 = b / a
        left = dmf_transfer(x0 - 1e-7, a, b, d)
        right = dmf_transfer(x0 + 1e-7, a, b, d)
        assert abs(left - right) < 1e-4

    def test_equilibrium_is_constant_without_noise(self):
        C = np.array([[0.0, 0.4], [0.3, 0.0]])
        cfg = DmfConfig(coupling=C, steps=200, dt=0.1, sigma=0.0)

        def drift_at(s):
            return dmf_drift(np.asarray(s), cfg)
        eq = fsolve(drift_at, np.full(2, 0.99))
        assert np.max(np.abs(drift_at(eq))) < 1e-10
        ds = simulate_dmf(DmfConfig(coupling=C, steps=200, dt=0.1, sigma=0.0,
                                    initial=tuple(eq)))
        np.testing.assert_allclose(ds.series[0].values,
                                   np.tile(eq, (201, 1)), atol=1e-6)

    def test_w_defaults_to_0_9(self):
        assert DmfConfig(coupling=np.zeros((2, 2)), steps=1, dt=0.1).w == 0.9

    def test_ground_truth_is_coupling_support(self):
        C = np.array([[0.0, 0.0, 0.5], [0.2, 0.0, 0.0], [0.0, 0.0, 0.0]])
        ds = simulate_dmf(DmfConfig(coupling=C, steps=2, dt=0.1, sigma=0.0))
        # receiver-major input: C[i, j] is the edge j -> i
        assert ds.ground_truth.edge_set() == {(2, 0), (0, 1)}

    def test_determinism(self):
        C = np.array([[0.0, 0.4], [0.3, 0.0]])
        a = simulate_dmf(DmfConfig(coupling=C, steps=50, dt=0.1, seed=9))
        b = simulate_dmf(DmfConfig(coupling=C, steps=50, dt=0.1, seed=9))
        np.testing.assert_array_equal(a.series[0].values, b.series[0].values)

    def test_negative_coupling_rejected(self):
        with pytest.raises(ConfigurationError):
            DmfConfig(coupling=np.array([[0.0, -0.1], [0.0, 0.0]]),
                      steps=1, dt=0.1)


class TestIaf:
    def test_resting_at_leak_potential(self):
        net = LabeledDigraph(WeightedDigraph(1, ()), (True,))
        cfg = IafConfig(network=net, steps=2000, I_e=0.0, v_init=(-70.0,),
                        export="voltage")
        ds = simulate_iaf_network(cfg)
        np.testing.assert_allclose(ds.series[0].values, -70.0, atol=1e-9)

    def test_subthreshold_steady_state_matches_written_equation(self):
        # tau_m dV/dt = -(V - E_L) + I/C_m  =>  V* = E_L + I/C_m
        net = LabeledDigraph(WeightedDigraph(1, ()), (True,))
        I_e, C_m = 2000.0, 250.0
        cfg = IafConfig(network=net, steps=30000, I_e=I_e, C_m=C_m,
                        v_init=(-70.0,), export="voltage")
        ds = simulate_iaf_network(cfg)
        v_star = -70.0 + I_e / C_m      # -62 mV, below V_th = -55
        assert ds.series[0].values[-1, 0] == pytest.approx(v_star, abs=1e-6)

    def test_eighty_twenty_split(self):
        net = random_network(50, 0.1, 0.8, seed=0)
        assert sum(net.excitatory) == 40
        assert sum(not e for e in net.excitatory) == 10

    def test_perturbation_spares_non_descendants(self):
        # 0 -> 1 -> 2 with isolated 3: raising neuron 0's threshold changes
        # descendants' traces, never the isolated neuron's
        g = WeightedDigraph(4, ((0, 1, 1.0), (1, 2, 1.0)))
        net = LabeledDigraph(g, (True, True, True, True))
        base = IafConfig(network=net, steps=8000, I_e=4200.0, seed=1)
        changed = IafConfig(network=net, steps=8000, I_e=4200.0, seed=1,
                            param_changes=(ParamChange(100.0, 0, "V_th", -50.0),))
        a = simulate_iaf_network(base).series[0].values
        b = simulate_iaf_network(changed).series[0].values
        assert not np.array_equal(a[:, 0], b[:, 0])
        np.testing.assert_array_equal(a[:, 3], b[:, 3])

    def test_spikes_drive_postsynaptic_neuron(self):
        g = WeightedDigraph(2, ((0, 1, 1.0),))
        net = LabeledDigraph(g, (True, True))
        # presynaptic fires (I_e above threshold), postsynaptic silent alone
        cfg = IafConfig(network=net, steps=10000, I_e=(4200.0, 0.0), seed=0)
        ds = simulate_iaf_network(cfg)
        rates = ds.series[0].values
        assert rates[:, 0].max() > 0.0
        v = simulate_iaf_network(
            IafConfig(network=net, steps=10000, I_e=(4200.0, 0.0), seed=0,
                      export="voltage")).series[0].values
        assert v[:, 1].max() > -70.0 + 1e-3

    def test_determinism(self):
        net = random_network(5, 0.3, 0.8, seed=2)
        cfg = IafConfig(network=net, steps=3000, i_e_jitter=300.0,
                        noise_std=50.0, seed=4)
        a = simulate_iaf_network(cfg)
        b = simulate_iaf_network(cfg)
        np.testing.assert_array_equal(a.series[0].values, b.series[0].values)

    def test_coarse_dt_rejected(self):
        net = LabeledDigraph(WeightedDigraph(1, ()), (True,))
        with pytest.raises(ConfigurationError):
            IafConfig(network=net, steps=10, dt=0.2)

    def test_reset_below_threshold_enforced(self):
        net = LabeledDigraph(WeightedDigraph(1, ()), (True,))
        with pytest.raises(ConfigurationError):
            IafConfig(network=net, steps=10, V_reset=-50.0, V_th=-55.0)

    def test_unknown_perturbed_parameter_rejected(self):
        with pytest.raises(ConfigurationError):
            ParamChange(10.0, 0, "tau_m", 5.0)


class TestRandomNetwork:
    def test_zero_probability_empty(self):
        assert random_network(6, 0.0, 0.8, seed=0).digraph.edge_set() == set()

    def test_full_probability_complete(self):
        net = random_network(3, 1.0, 0.5, seed=0)
        assert len(net.digraph.edge_set()) == 6

    def test_no_self_loops(self):
        net = random_network(10, 1.0, 0.5, seed=1)
        assert all(s != d for s, d in net.digraph.edge_set())

    def test_same_seed_identical(self):
        a = random_network(8, 0.4, 0.75, seed=5)
        b = random_network(8, 0.4, 0.75, seed=5)
        assert a.digraph.edge_set() == b.digraph.edge_set()
        assert a.excitatory == b.excitatory

    def test_source_label_sets_sign(self):
        g = WeightedDigraph(2, ((0, 1, 2.0), (1, 0, 3.0)))
        net = LabeledDigraph(g, (True, False))
        signed = net.signed_adjacency()
        # receiver-major: entry (i, j) holds the weight of j -> i
        assert signed[1, 0] == 2.0
        assert signed[0, 1] == -3.0

    def test_probability_validated(self):
        with pytest.raises(ValueError):
            random_network(4, 1.5, 0.5, seed=0)
