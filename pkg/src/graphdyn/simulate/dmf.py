"""Dynamic mean-field gating model (reduced spiking attractor network).

Euler-Maruyama integration of

    dS_i/dt = -S_i/tau_s + gamma*(1 - S_i)*H(x_i) + sigma*nu_i(t)
    x_i     = w*J_N*S_i - G*J_N*sum_j C_ij S_j + I_o
    H(x)    = (a*x - b) / (1 - exp(-d*(a*x - b)))

Note the minus sign on the coupling sum: the source equations are kept
verbatim.  H is continuous through a*x - b = 0 where its value is the
limit 1/d.  The transfer constants a, b, d default to conventional
values; nothing downstream depends on these numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset, MultivariateTimeSeries
from ..errors import ConfigurationError, SimulationBlowUpError
from ..graphs import WeightedDigraph


def dmf_transfer(x: np.ndarray, a: float = 270.0, b: float = 108.0,
                 d: float = 0.154) -> np.ndarray:
    """H(x) with the removable singularity at a*x == b filled by 1/d."""
    u = a * np.asarray(x, dtype=float) - b
    small = np.abs(u) < 1e-8
    safe = np.where(small, 1.0, u)
    out = safe / (1.0 - np.exp(-d * safe))
    return np.where(small, 1.0 / d + 0.5 * u, out)


@dataclass(frozen=True)
class DmfConfig:
    coupling: np.ndarray          # C_ij >= 0, receiver-major
    steps: int
    dt: float                     # ms
    tau_s: float = 100.0
    gamma: float = 0.641
    sigma: float = 0.01
    a: float = 270.0
    b: float = 108.0
    d: float = 0.154
    w: float = 0.9
    G: float = 1.0
    J_N: float = 0.2609
    I_o: float = 0.3
    seed: int = 0
    initial: tuple[float, ...] | float = 0.1

    def __post_init__(self) -> None:
        C = np.asarray(self.coupling, dtype=float)
        object.__setattr__(self, "coupling", C)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ConfigurationError("coupling must be a square matrix")
        if np.any(C < 0):
            raise ConfigurationError("coupling entries must be nonnegative")
        if self.tau_s <= 0:
            raise ConfigurationError("tau_s must be positive")
        if self.steps < 1 or self.dt <= 0:
            raise ConfigurationError("steps must be >= 1 and dt > 0")


def dmf_drift(S: np.ndarray, config: DmfConfig) -> np.ndarray:
    x = config.w * config.J_N * S - config.G * config.J_N * (config.coupling @ S) \
        + config.I_o
    H = dmf_transfer(x, config.a, config.b, config.d)
    return -S / config.tau_s + config.gamma * (1.0 - S) * H


def simulate_dmf(config: DmfConfig) -> Dataset:
    n = config.coupling.shape[0]
    S = np.asarray(config.initial, dtype=float)
    if S.ndim == 0:
        S = np.full(n, float(S))
    if S.shape != (n,):
        raise ConfigurationError(f"initial must be scalar or length {n}")
    rng = np.random.default_rng(config.seed)
    T = config.steps + 1
    out = np.empty((T, n))
    out[0] = S
    root_dt = np.sqrt(config.dt)
    state = S.copy()
    for step in range(config.steps):
        drift = dmf_drift(state, config)
        state = state + config.dt * drift
        if config.sigma > 0:
            state = state + config.sigma * root_dt * rng.standard_normal(n)
        if not np.all(np.isfinite(state)):
            raise SimulationBlowUpError(f"state became non-finite at step {step + 1}")
        out[step + 1] = state

    times = np.arange(T) * config.dt
    series = MultivariateTimeSeries(times, out)
    truth = WeightedDigraph.from_adjacency(config.coupling)
    return Dataset((series,), {}, ground_truth=truth)
