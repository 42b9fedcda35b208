"""Network Wilson-Cowan rate model.

One rate per vertex with signed coupling from excitatory/inhibitory
labels; the classical two-population form is the n=2 case.  Integration
is classical RK4 with a fixed step.

    dr_i/dt = (gain_i * S(sum_j M_ij r_j) - theta_i - r_i) / tau_i

with S(x) = 1/(1 + exp(-k*x)) - 1/2, so S(0) = 0 and the zero-coupling,
zero-threshold system decays as exp(-t/tau).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset, MultivariateTimeSeries, PerturbationRecord
from ..errors import ConfigurationError, SimulationBlowUpError
from .networks import LabeledDigraph


def activation(x: np.ndarray, steepness: float) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-steepness * x)) - 0.5


@dataclass(frozen=True)
class WilsonCowanConfig:
    coupling: LabeledDigraph
    steps: int
    dt: float
    gains: tuple[float, ...] | float = 1.0
    thresholds: tuple[float, ...] | float = 0.0
    taus: tuple[float, ...] | float = 1.0
    steepness: float = 4.0
    initial: tuple[float, ...] | None = None
    seed: int = 0
    perturbations: tuple[PerturbationRecord, ...] = ()

    def per_vertex(self, value, name: str) -> np.ndarray:
        n = self.coupling.n
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 0:
            arr = np.full(n, float(arr))
        if arr.shape != (n,):
            raise ConfigurationError(f"{name} must be scalar or length {n}")
        return arr

    def __post_init__(self) -> None:
        taus = self.per_vertex(self.taus, "taus")
        if np.any(taus <= 0):
            raise ConfigurationError("time constants must be positive")
        if self.steps < 1 or self.dt <= 0:
            raise ConfigurationError("steps must be >= 1 and dt > 0")
        if self.dt > taus.min() / 10.0 + 1e-12:
            raise ConfigurationError(
                f"dt={self.dt} exceeds min(tau)/10 = {taus.min() / 10.0}")


def wilson_cowan_rhs(r: np.ndarray, signed: np.ndarray, gains: np.ndarray,
                     thetas: np.ndarray, taus: np.ndarray,
                     steepness: float) -> np.ndarray:
    return (gains * activation(signed @ r, steepness) - thetas - r) / taus


def simulate_wilson_cowan(config: WilsonCowanConfig) -> Dataset:
    n = config.coupling.n
    signed = config.coupling.signed_adjacency()
    gains = config.per_vertex(config.gains, "gains")
    thetas = config.per_vertex(config.thresholds, "thresholds")
    taus = config.per_vertex(config.taus, "taus")
    if config.initial is not None:
        r = config.per_vertex(config.initial, "initial").copy()
    else:
        r = np.random.default_rng(config.seed).uniform(-0.5, 0.5, size=n)

    injections: dict[int, list[tuple[int, float]]] = {}
    for rec in config.perturbations:
        idx = int(round(rec.time / config.dt))
        if not 0 <= idx <= config.steps or abs(rec.time - idx * config.dt) > 1e-9:
            raise ConfigurationError(f"perturbation time {rec.time} off grid")
        injections.setdefault(idx, []).append((rec.vertex, rec.epsilon))

    def rhs(state: np.ndarray) -> np.ndarray:
        return wilson_cowan_rhs(state, signed, gains, thetas, taus,
                                config.steepness)

    T = config.steps + 1
    out = np.empty((T, n))
    out[0] = r
    for v, eps in injections.get(0, ()):
        out[0, v] += eps
    h = config.dt
    state = out[0].copy()
    for step in range(config.steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise SimulationBlowUpError(f"state became non-finite at step {step + 1}")
        for v, eps in injections.get(step + 1, ()):
            state[v] += eps
        out[step + 1] = state

    times = np.arange(T) * config.dt
    series = MultivariateTimeSeries(times, out)
    pert = {0: config.perturbations} if config.perturbations else {}
    return Dataset((series,), pert, ground_truth=config.coupling.digraph)
