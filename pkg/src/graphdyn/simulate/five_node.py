"""The coupled five-variable nonlinear benchmark system.

Discrete-time update on a unit grid (dt = 1):

    x1(t+1) = x1(t) + 0.95*sqrt(2)*x1(t-1) - 0.9025*x1(t-2)
    x2(t+1) = x2(t) + 0.5*x1(t-2)^2
    x3(t+1) = x3(t) - 0.4*x1(t-3)
    x4(t+1) = x4(t) - 0.5*x1(t-2)^2 + 0.5*sqrt(2)*x4(t-1) + 0.25*sqrt(2)*x5(t-1)
    x5(t+1) = x5(t) - 0.5*sqrt(2)*x4(t-1) + 0.5*sqrt(2)*x5(t-1)

The maximum lag is 3, so indices 0..3 hold the initial values and the
first computed index is 4.  The linear part is unstable (dominant root
about 1.495, and the squared couplings feed x2/x4 at that rate squared),
so trajectories grow exponentially.  Keep ``steps`` around 30: much
beyond that the early signal falls below double-precision resolution of
the late values and any standardized regression on the data degenerates.

Interaction ground truth: x1->x2, x1->x3, x1->x4, x4->x5, x5->x4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset, MultivariateTimeSeries, PerturbationRecord
from ..errors import ConfigurationError
from ..graphs import WeightedDigraph

GROUND_TRUTH_EDGES = ((0, 1), (0, 2), (0, 3), (3, 4), (4, 3))

_R2 = math.sqrt(2.0)


@dataclass(frozen=True)
class FiveNodeConfig:
    """Configuration for simulate_five_node.

    ``replicate_sigmas`` appends extra series at the given noise
    amplitudes.  Noise is seeded per series (stream k derives from
    (seed, k)), and injections never consume random draws, so running
    the same series with and without a perturbation yields trajectories
    that differ only through the injection and its downstream effects.
    ``perturbations`` holds (series_index, record) pairs; the injection
    is applied mid-run, so values downstream of it change too.
    """

    steps: int = 30
    noise_sigma: float = 0.05
    seed: int = 0
    initial: tuple[float, float, float, float, float] = (0.0,) * 5
    replicate_sigmas: tuple[float, ...] = ()
    perturbations: tuple[tuple[int, PerturbationRecord], ...] = ()

    def __post_init__(self) -> None:
        if self.steps < 4:
            raise ConfigurationError("steps must be at least 4 (maximum lag is 3)")
        if self.noise_sigma < 0 or any(s < 0 for s in self.replicate_sigmas):
            raise ConfigurationError("noise sigma must be nonnegative")
        if len(self.initial) != 5:
            raise ConfigurationError("initial needs exactly five values")


def _run(T: int, sigma: float, initial, noise: np.ndarray,
         injections: dict[int, list[tuple[int, float]]]) -> np.ndarray:
    x = np.empty((T, 5))
    x[:4] = np.asarray(initial, dtype=float)
    for idx in range(min(4, T)):
        for v, eps in injections.get(idx, ()):
            x[idx, v] += eps
    for t in range(3, T - 1):
        x1, x4, x5 = x[:, 0], x[:, 3], x[:, 4]
        nxt = np.empty(5)
        nxt[0] = x1[t] + 0.95 * _R2 * x1[t - 1] - 0.9025 * x1[t - 2]
        nxt[1] = x[t, 1] + 0.5 * x1[t - 2] ** 2
        nxt[2] = x[t, 2] - 0.4 * x1[t - 3]
        nxt[3] = x4[t] - 0.5 * x1[t - 2] ** 2 + 0.5 * _R2 * x4[t - 1] \
            + 0.25 * _R2 * x5[t - 1]
        nxt[4] = x5[t] - 0.5 * _R2 * x4[t - 1] + 0.5 * _R2 * x5[t - 1]
        if sigma > 0:
            nxt += sigma * noise[t + 1]
        x[t + 1] = nxt
        for v, eps in injections.get(t + 1, ()):
            x[t + 1, v] += eps
    return x


def simulate_five_node(config: FiveNodeConfig) -> Dataset:
    T = config.steps
    sigmas = (config.noise_sigma,) + tuple(config.replicate_sigmas)
    times = np.arange(T, dtype=float)

    per_series: dict[int, list[PerturbationRecord]] = {}
    for k, rec in config.perturbations:
        if not 0 <= k < len(sigmas):
            raise ConfigurationError(f"perturbation addressed to series {k}")
        per_series.setdefault(int(k), []).append(rec)

    series = []
    for k, sigma in enumerate(sigmas):
        injections: dict[int, list[tuple[int, float]]] = {}
        for rec in per_series.get(k, ()):
            idx = int(round(rec.time))
            if not 0 <= idx < T or abs(rec.time - idx) > 1e-9:
                raise ConfigurationError(f"perturbation time {rec.time} off grid")
            injections.setdefault(idx, []).append((rec.vertex, rec.epsilon))
        noise = np.random.default_rng([config.seed, k]).standard_normal((T, 5))
        values = _run(T, sigma, config.initial, noise, injections)
        series.append(MultivariateTimeSeries(
            times, values, ("x1", "x2", "x3", "x4", "x5")))

    truth = WeightedDigraph(5, tuple((s, d, 1.0) for s, d in GROUND_TRUTH_EDGES))
    return Dataset(tuple(series),
                   {k: tuple(v) for k, v in per_series.items()},
                   ground_truth=truth)
