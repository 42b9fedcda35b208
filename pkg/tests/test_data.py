"""Series containers, windowing, splitting and dataset persistence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdyn import (Dataset, MultivariateTimeSeries, PerturbationRecord,
                      PriorGraph, WeightedDigraph, apply_perturbation,
                      lag_window, load_dataset, save_dataset, split_holdout)
from graphdyn.errors import (ConfigurationError, DataFormatError,
                             GridAlignmentError)


def make_series(T=8, n=3, dt=0.5, seed=0):
    rng = np.random.default_rng(seed)
    return MultivariateTimeSeries(np.arange(T) * dt, rng.random((T, n)))


class TestMultivariateTimeSeries:
    def test_basic_properties(self):
        s = make_series(T=6, n=2, dt=0.25)
        assert s.n_times == 6
        assert s.n_vertices == 2
        assert s.dt == 0.25
        assert s.vertex_names == ("v0", "v1")

    def test_rejects_irregular_grid(self):
        with pytest.raises(ValueError, match="uniform"):
            MultivariateTimeSeries(np.array([0.0, 1.0, 2.5]), np.zeros((3, 1)))

    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError, match="increasing"):
            MultivariateTimeSeries(np.array([0.0, 0.0, 1.0]), np.zeros((3, 1)))

    def test_rejects_non_finite(self):
        values = np.zeros((3, 1))
        values[1, 0] = np.inf
        with pytest.raises(ValueError, match="finite"):
            MultivariateTimeSeries(np.arange(3.0), values)

    def test_rejects_single_row(self):
        with pytest.raises(ValueError):
            MultivariateTimeSeries(np.array([0.0]), np.zeros((1, 2)))

    def test_grid_index(self):
        s = make_series(T=5, dt=0.5)
        assert s.grid_index(1.5) == 3
        assert s.grid_index(0.0) == 0
        with pytest.raises(GridAlignmentError):
            s.grid_index(1.3)
        with pytest.raises(GridAlignmentError):
            s.grid_index(2.5)  # just past the end


class TestLagWindow:
    def test_window_rows_are_lags(self):
        s = make_series(T=6, n=2, dt=1.0)
        win = lag_window(s, 4.0, tau=2.0)
        np.testing.assert_array_equal(win[0], s.values[4])
        np.testing.assert_array_equal(win[1], s.values[3])
        np.testing.assert_array_equal(win[2], s.values[2])

    def test_pre_start_repeats_first_row(self):
        s = make_series(T=5, n=2, dt=1.0)
        win = lag_window(s, 1.0, tau=3.0)
        np.testing.assert_array_equal(win[0], s.values[1])
        np.testing.assert_array_equal(win[1], s.values[0])
        np.testing.assert_array_equal(win[2], s.values[0])
        np.testing.assert_array_equal(win[3], s.values[0])

    def test_history_rows_take_precedence(self):
        s = make_series(T=5, n=2, dt=1.0)
        history = np.full_like(s.values, np.nan)
        history[2] = (9.0, 9.0)
        win = lag_window(s, 3.0, tau=1.0, history=history)
        np.testing.assert_array_equal(win[0], s.values[3])
        np.testing.assert_array_equal(win[1], (9.0, 9.0))

    def test_tau_must_align(self):
        s = make_series(dt=0.5)
        with pytest.raises(ValueError, match="multiple"):
            lag_window(s, 1.0, tau=0.7)

    def test_zero_tau(self):
        s = make_series(dt=0.5)
        win = lag_window(s, 1.0, tau=0.0)
        assert win.shape == (1, s.n_vertices)


class TestPerturbation:
    def test_single_entry_changes(self):
        s = make_series(T=5, n=3, dt=1.0)
        bumped = apply_perturbation(s, PerturbationRecord(1, 2.0, 0.25))
        diff = bumped.values - s.values
        assert diff[2, 1] == 0.25
        assert np.count_nonzero(diff) == 1

    def test_vertex_out_of_range(self):
        s = make_series(n=2)
        with pytest.raises(ValueError):
            apply_perturbation(s, PerturbationRecord(5, 0.0, 1.0))

    def test_off_grid_time(self):
        s = make_series(dt=1.0)
        with pytest.raises(GridAlignmentError):
            apply_perturbation(s, PerturbationRecord(0, 0.4, 1.0))


class TestSplitHoldout:
    def test_counts(self):
        s = make_series(T=10, dt=1.0)
        train, held = split_holdout(s, 0.2, seed=0)
        assert len(held) == 2
        assert len(train) == 8

    def test_partition_and_interior(self):
        s = make_series(T=17)
        train, held = split_holdout(s, 0.3, seed=3)
        assert sorted(np.concatenate([train, held])) == list(range(17))
        assert len(set(train) & set(held)) == 0
        assert 0 in train and 16 in train

    @given(st.integers(4, 40), st.floats(0.05, 0.6), st.integers(0, 50))
    @settings(max_examples=100, deadline=None)
    def test_partition_property(self, T, fraction, seed):
        s = make_series(T=T)
        k = int(round(fraction * T))
        if T - k < 2:
            return
        train, held = split_holdout(s, fraction, seed)
        assert set(train) | set(held) == set(range(T))
        assert not set(train) & set(held)
        assert {0, T - 1} <= set(train)

    def test_fraction_bounds(self):
        s = make_series(T=10)
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                split_holdout(s, bad, 0)

    def test_too_aggressive(self):
        s = make_series(T=5)
        with pytest.raises(ConfigurationError):
            split_holdout(s, 0.9, 0)

    def test_seeded(self):
        s = make_series(T=20)
        a = split_holdout(s, 0.25, 7)
        b = split_holdout(s, 0.25, 7)
        np.testing.assert_array_equal(a[1], b[1])


class TestDataset:
    def test_shared_grid_required(self):
        a = make_series(T=5, dt=1.0)
        b = make_series(T=5, dt=0.5)
        with pytest.raises(ValueError, match="dt"):
            Dataset((a, b))

    def test_shared_vertex_count_required(self):
        with pytest.raises(ValueError, match="vertex count"):
            Dataset((make_series(n=2), make_series(n=3)))

    def test_perturbation_bookkeeping(self):
        s = make_series(T=6, dt=1.0)
        ds = Dataset((s, s), {1: (PerturbationRecord(0, 2.0, 0.1),)})
        assert not ds.is_perturbed(0)
        assert ds.is_perturbed(1)

    def test_perturbation_series_range(self):
        s = make_series()
        with pytest.raises(ValueError):
            Dataset((s,), {3: (PerturbationRecord(0, 0.0, 0.1),)})


class TestPersistence:
    def _dataset(self):
        a = make_series(T=6, n=2, dt=0.5, seed=1)
        b = make_series(T=6, n=2, dt=0.5, seed=2)
        truth = WeightedDigraph(2, ((0, 1, 1.0),))
        prior = PriorGraph(WeightedDigraph(2, ((1, 0, 0.5),)))
        return Dataset((a, b), {1: (PerturbationRecord(1, 1.5, 0.2),)},
                       ground_truth=truth, prior=prior)

    def test_round_trip_exact(self, tmp_path):
        ds = self._dataset()
        save_dataset(ds, tmp_path)
        back = load_dataset(tmp_path)
        assert len(back.series) == 2
        for s0, s1 in zip(ds.series, back.series):
            np.testing.assert_array_equal(s0.values, s1.values)
            np.testing.assert_array_equal(s0.times, s1.times)
            assert s0.vertex_names == s1.vertex_names
        assert back.ground_truth.edge_set() == ds.ground_truth.edge_set()
        assert back.prior.support == ds.prior.support
        assert back.perturbations == ds.perturbations

    def test_layout(self, tmp_path):
        save_dataset(self._dataset(), tmp_path)
        assert (tmp_path / "timeseries_0.csv").exists()
        assert (tmp_path / "timeseries_1.csv").exists()
        assert (tmp_path / "meta.json").exists()
        header = (tmp_path / "timeseries_0.csv").read_text().splitlines()[0]
        assert header == "time,v0,v1"

    def test_missing_meta(self, tmp_path):
        with pytest.raises(DataFormatError, match="meta.json"):
            load_dataset(tmp_path)

    def test_malformed_row_names_file_and_line(self, tmp_path):
        save_dataset(self._dataset(), tmp_path)
        path = tmp_path / "timeseries_0.csv"
        lines = path.read_text().splitlines()
        lines[3] = "1.0,2.0"  # one field short
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError, match=r"timeseries_0\.csv:4"):
            load_dataset(tmp_path)

    def test_bad_float_names_file_and_line(self, tmp_path):
        save_dataset(self._dataset(), tmp_path)
        path = tmp_path / "timeseries_1.csv"
        lines = path.read_text().splitlines()
        lines[2] = lines[2].rsplit(",", 1)[0] + ",notanumber"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError, match=r"timeseries_1\.csv:3"):
            load_dataset(tmp_path)

    def test_bad_header(self, tmp_path):
        save_dataset(self._dataset(), tmp_path)
        path = tmp_path / "timeseries_0.csv"
        body = path.read_text().splitlines()[1:]
        path.write_text("\n".join(["stamp,v0,v1"] + body) + "\n")
        with pytest.raises(DataFormatError, match="header"):
            load_dataset(tmp_path)

    def test_bad_meta_json(self, tmp_path):
        save_dataset(self._dataset(), tmp_path)
        (tmp_path / "meta.json").write_text("{not json")
        with pytest.raises(DataFormatError, match="meta.json"):
            load_dataset(tmp_path)

    @given(st.lists(st.floats(-1e12, 1e12, allow_nan=False).map(
        lambda x: x or 0.0), min_size=4, max_size=12))
    @settings(max_examples=50, deadline=None)
    def test_value_round_trip_is_exact(self, tmp_path_factory, values):
        tmp_path = tmp_path_factory.mktemp("roundtrip")
        arr = np.array(values).reshape(-1, 1)
        if len(arr) < 2:
            return
        s = MultivariateTimeSeries(np.arange(len(arr), dtype=float), arr)
        save_dataset(Dataset((s,)), tmp_path)
        back = load_dataset(tmp_path)
        np.testing.assert_array_equal(back.series[0].values, arr)
