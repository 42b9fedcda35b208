"""Time-series dataset types, windowing, splitting and persistence.

Dataset directory layout:

    timeseries_<k>.csv   header ``time,v0,...,v{N-1}``, one row per timepoint
    meta.json            {"dt", "vertices", "ground_truth_edges",
                          "perturbations", "prior"}

Floats are written with 17 significant digits, so save -> load is exact.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (ConfigurationError, DataFormatError, GridAlignmentError,
                     InsufficientDataError)
from .graphs import PriorGraph, WeightedDigraph
from .serialize import canonical_json, format_float

GRID_RTOL = 1e-9


@dataclass(frozen=True)
class MultivariateTimeSeries:
    """Vertex signals sampled on a uniform time grid.

    values is T x N: row = timepoint, column = vertex.
    """

    times: np.ndarray
    values: np.ndarray
    vertex_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or values.ndim != 2 or len(times) != len(values):
            raise ValueError("times must be 1-D and match values' row count")
        if len(times) < 2:
            raise ValueError("a series needs at least two timepoints")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ValueError("times must be strictly increasing")
        dt = steps[0]
        if np.any(np.abs(steps - dt) > GRID_RTOL * max(abs(dt), 1.0)):
            raise ValueError("time grid must be uniform")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if not self.vertex_names:
            object.__setattr__(self, "vertex_names", tuple(
                f"v{i}" for i in range(values.shape[1])))
        elif len(self.vertex_names) != values.shape[1]:
            raise ValueError("vertex_names length must equal column count")

    @property
    def n_vertices(self) -> int:
        return self.values.shape[1]

    @property
    def n_times(self) -> int:
        return self.values.shape[0]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def grid_index(self, t: float) -> int:
        """Index of grid time t, or GridAlignmentError if off-grid."""
        idx = (t - self.times[0]) / self.dt
        k = int(round(idx))
        if k < 0 or k >= self.n_times or abs(idx - k) > 1e-6:
            raise GridAlignmentError(
                f"time {t!r} is not on the grid [{self.times[0]}, "
                f"{self.times[-1]}] step {self.dt}")
        return k


@dataclass(frozen=True)
class PerturbationRecord:
    """A noise injection of size epsilon at one vertex and grid time."""

    vertex: int
    time: float
    epsilon: float


@dataclass(frozen=True)
class Dataset:
    """A collection of series sharing grid and vertices.

    perturbations maps series index -> records describing injections the
    simulator applied mid-run to that series (downstream values reflect
    them).  Series with a nonempty record list are the "perturbed
    replicates"; training may weight them separately.
    """

    series: tuple[MultivariateTimeSeries, ...]
    perturbations: Mapping[int, tuple[PerturbationRecord, ...]] = field(
        default_factory=dict)
    ground_truth: WeightedDigraph | None = None
    prior: PriorGraph | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "series", tuple(self.series))
        if not self.series:
            raise ValueError("a dataset needs at least one series")
        first = self.series[0]
        for s in self.series:
            if s.n_vertices != first.n_vertices:
                raise ValueError("all series must share the vertex count")
            if abs(s.dt - first.dt) > GRID_RTOL * max(abs(first.dt), 1.0):
                raise ValueError("all series must share dt")
        pert = {int(k): tuple(v) for k, v in dict(self.perturbations).items()}
        for k, records in pert.items():
            if not (0 <= k < len(self.series)):
                raise ValueError(f"perturbation list references series {k}")
            for r in records:
                if not (0 <= r.vertex < first.n_vertices):
                    raise ValueError(f"perturbation vertex {r.vertex} out of range")
                self.series[k].grid_index(r.time)
        object.__setattr__(self, "perturbations", pert)

    @property
    def n_vertices(self) -> int:
        return self.series[0].n_vertices

    def is_perturbed(self, k: int) -> bool:
        return bool(self.perturbations.get(k, ()))


def lag_window(series: MultivariateTimeSeries, t: float, tau: float,
               history: np.ndarray | None = None) -> np.ndarray:
    """L x N window: row l holds the signals at time t - l*dt.

    tau must equal (L-1)*dt for an integer L >= 1.  Timepoints before the
    series start repeat the first observation.  When ``history`` (a T x N
    matrix) is given, rows of it that contain no NaN take precedence over
    the observed rows; NaN rows fall back to observations.
    """
    dt = series.dt
    ratio = tau / dt
    lags = int(round(ratio)) + 1
    if tau < 0 or abs(ratio - round(ratio)) > 1e-6:
        raise ValueError(f"tau={tau} is not a multiple of dt={dt}")
    k = series.grid_index(t)
    base = series.values
    if history is not None:
        history = np.asarray(history, dtype=float)
        if history.shape != base.shape:
            raise ValueError("history must match the series shape")
        use = ~np.isnan(history).any(axis=1)
        base = np.where(use[:, None], history, base)
    rows = [base[max(k - l, 0)] for l in range(lags)]
    return np.stack(rows)


def apply_perturbation(series: MultivariateTimeSeries,
                       record: PerturbationRecord) -> MultivariateTimeSeries:
    """Copy of the series with +epsilon added at (record.time, record.vertex).

    Only that single entry changes.  Simulators apply the same injection
    mid-run, so there the downstream values change as well; this function
    is the data-level marker of where such trajectories diverge.
    """
    if not (0 <= record.vertex < series.n_vertices):
        raise ValueError(f"vertex {record.vertex} out of range")
    k = series.grid_index(record.time)
    values = series.values.copy()
    values[k, record.vertex] += record.epsilon
    return MultivariateTimeSeries(series.times.copy(), values, series.vertex_names)


def split_holdout(series: MultivariateTimeSeries, fraction: float,
                  seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Partition grid indices into (train, held_out).

    Held-out indices are interior (never the first or last index), chosen
    uniformly without replacement; their count is round(fraction * T).
    """
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    T = series.n_times
    if T < 4:
        raise InsufficientDataError("need at least 4 timepoints to split")
    k = int(round(fraction * T))
    if T - k < 2:
        raise ConfigurationError(
            f"holding out {k} of {T} points leaves fewer than 2 training points")
    interior = np.arange(1, T - 1)
    k = min(k, len(interior))
    rng = np.random.default_rng(seed)
    held = np.sort(rng.choice(interior, size=k, replace=False))
    train = np.setdiff1d(np.arange(T), held)
    return train, held


def save_dataset(dataset: Dataset, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for k, s in enumerate(dataset.series):
        path = directory / f"timeseries_{k}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("time," + ",".join(s.vertex_names) + "\n")
            for row_t, row_v in zip(s.times, s.values):
                fh.write(format_float(row_t) + ","
                         + ",".join(format_float(v) for v in row_v) + "\n")
    meta = {
        "dt": dataset.series[0].dt,
        "vertices": list(dataset.series[0].vertex_names),
        "ground_truth_edges": sorted(
            [s, d] for s, d in dataset.ground_truth.edge_set())
        if dataset.ground_truth is not None else None,
        "perturbations": [
            {"series": k, "vertex": r.vertex, "time": r.time, "epsilon": r.epsilon}
            for k in sorted(dataset.perturbations)
            for r in dataset.perturbations[k]],
        "prior": dataset.prior.digraph.to_json_dict()
        if dataset.prior is not None else None,
    }
    (directory / "meta.json").write_text(canonical_json(meta, indent=2) + "\n")


def load_dataset(directory: str | Path) -> Dataset:
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.exists():
        raise DataFormatError(f"{meta_path} is missing")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{meta_path}: {exc}") from exc
    names = tuple(meta.get("vertices") or ())
    series = []
    k = 0
    while (directory / f"timeseries_{k}.csv").exists():
        series.append(_load_series(directory / f"timeseries_{k}.csv", names))
        k += 1
    if not series:
        raise DataFormatError(f"no timeseries_<k>.csv files in {directory}")
    truth = None
    if meta.get("ground_truth_edges") is not None:
        n = series[0].n_vertices
        truth = WeightedDigraph(n, tuple(
            (int(s), int(d), 1.0) for s, d in meta["ground_truth_edges"]))
    prior = None
    if meta.get("prior") is not None:
        prior = PriorGraph(WeightedDigraph.from_json_dict(meta["prior"]))
    pert: dict[int, list[PerturbationRecord]] = {}
    for rec in meta.get("perturbations") or ():
        pert.setdefault(int(rec["series"]), []).append(
            PerturbationRecord(int(rec["vertex"]), float(rec["time"]),
                               float(rec["epsilon"])))
    return Dataset(tuple(series),
                   {k: tuple(v) for k, v in pert.items()},
                   ground_truth=truth, prior=prior)


def _load_series(path: Path, names: tuple[str, ...]) -> MultivariateTimeSeries:
    times: list[float] = []
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if not header or header[0] != "time":
            raise DataFormatError(f"{path}:1: header must start with 'time'")
        width = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width + 1:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {width + 1} fields, got {len(row)}")
            try:
                times.append(float(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    if len(times) < 2:
        raise DataFormatError(f"{path}: needs at least two data rows")
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise DataFormatError(f"{path}: time column must be strictly increasing")
    use_names = tuple(header[1:]) if not names else names
    try:
        return MultivariateTimeSeries(np.array(times), np.array(rows), use_names)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
