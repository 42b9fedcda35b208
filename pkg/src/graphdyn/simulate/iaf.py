"""Leaky integrate-and-fire network with alpha-function synapses.

Forward-Euler integration (default resolution 0.1 ms) of

    tau_m * dV/dt = -(V - E_L) + (I_e + I_syn)/C_m

taken verbatim from the source description.  As written, the I/C_m term
is a voltage *rate* (pA/pF = mV/ms) added to a voltage, so the equation
is dimensionally inconsistent; it is implemented anyway, which makes the
subthreshold fixed point V = E_L + I/C_m.  Units: mV, pF, ms, pA.

Spikes: V >= V_th emits a spike, V clamps to V_reset for t_ref ms.
Synapses: each delivered spike feeds a two-state alpha cascade

    ds1/dt = -s1/tau_syn      (impulse: s1 += w*e/tau_syn)
    ds2/dt = (s1 - s2)/tau_syn

so the postsynaptic current s2 peaks at exactly w (pA) one rise time
after delivery.  Inhibitory sources contribute negative w.

The emitted feature per neuron is a Gaussian-smoothed firing rate in Hz
on a coarse grid (``record_dt``); membrane voltage export is available
via ``export="voltage"``.  Parameter perturbations are step changes of
{V_th, E_L, C_m, t_ref} for one neuron from a scheduled time onward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from ..data import Dataset, MultivariateTimeSeries
from ..errors import ConfigurationError, SimulationBlowUpError
from .networks import LabeledDigraph

PERTURBABLE = ("V_th", "E_L", "C_m", "t_ref")


@dataclass(frozen=True)
class ParamChange:
    """Set ``parameter`` of ``neuron`` to ``value`` from time ``time`` (ms) on."""

    time: float
    neuron: int
    parameter: str
    value: float

    def __post_init__(self) -> None:
        if self.parameter not in PERTURBABLE:
            raise ConfigurationError(
                f"perturbable parameters are {PERTURBABLE}, got {self.parameter!r}")


@dataclass(frozen=True)
class IafConfig:
    network: LabeledDigraph
    steps: int
    dt: float = 0.1               # ms; resolutions coarser than 0.1 are rejected
    E_L: float = -70.0
    C_m: float = 250.0
    tau_m: float = 10.0
    t_ref: float = 2.0
    V_th: float = -55.0
    V_reset: float = -70.0
    V_min: float = -90.0
    tau_syn_ex: float = 2.0
    tau_syn_in: float = 2.0
    I_e: float | tuple[float, ...] = 4000.0
    i_e_jitter: float = 0.0       # seeded uniform(-j, +j) per neuron, pA
    noise_std: float = 0.0        # seeded per-step current noise, pA
    weight_ex: float = 100.0      # peak synaptic current per unit edge weight, pA
    weight_in: float = 200.0
    delay: float = 1.0            # ms
    seed: int = 0
    v_init: tuple[float, ...] | None = None
    record_dt: float = 5.0        # ms per output bin
    smooth_sigma: float = 10.0    # ms, Gaussian rate-smoothing width
    export: str = "rate"          # "rate" | "voltage"
    param_changes: tuple[ParamChange, ...] = ()

    def __post_init__(self) -> None:
        if self.dt > 0.1 + 1e-12:
            raise ConfigurationError("dt above the 0.1 ms default resolution is rejected")
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if self.V_reset >= self.V_th:
            raise ConfigurationError("V_reset must be below V_th")
        if self.tau_m <= 0 or self.tau_syn_ex <= 0 or self.tau_syn_in <= 0:
            raise ConfigurationError("time constants must be positive")
        if self.steps < 1:
            raise ConfigurationError("steps must be >= 1")
        if self.record_dt < self.dt:
            raise ConfigurationError("record_dt must be at least dt")
        if self.export not in ("rate", "voltage"):
            raise ConfigurationError("export must be 'rate' or 'voltage'")
        if self.delay < self.dt:
            raise ConfigurationError("delay must be at least one step")
        for ch in self.param_changes:
            if not 0 <= ch.neuron < self.network.n:
                raise ConfigurationError(f"perturbed neuron {ch.neuron} out of range")


def simulate_iaf_network(config: IafConfig) -> Dataset:
    n = config.network.n
    rng = np.random.default_rng(config.seed)
    dt = config.dt

    # per-neuron parameter arrays (perturbations rewrite single entries)
    V_th = np.full(n, config.V_th)
    E_L = np.full(n, config.E_L)
    C_m = np.full(n, config.C_m)
    t_ref = np.full(n, config.t_ref)

    I_e = np.asarray(config.I_e, dtype=float)
    if I_e.ndim == 0:
        I_e = np.full(n, float(I_e))
    if I_e.shape != (n,):
        raise ConfigurationError(f"I_e must be scalar or length {n}")
    if config.i_e_jitter > 0:
        I_e = I_e + rng.uniform(-config.i_e_jitter, config.i_e_jitter, size=n)

    if config.v_init is not None:
        V = np.asarray(config.v_init, dtype=float).copy()
        if V.shape != (n,):
            raise ConfigurationError(f"v_init must have length {n}")
    else:
        V = config.E_L + rng.uniform(0.0, 1.0, size=n) * (config.V_th - config.E_L)

    # signed peak currents: column j = effect of a spike of neuron j
    signs = np.where(np.array(config.network.excitatory), config.weight_ex,
                     -config.weight_in)
    W = config.network.digraph.adjacency() * signs[None, :]
    is_ex_source = np.array(config.network.excitatory)
    W_ex = np.where(is_ex_source[None, :], W, 0.0)
    W_in = np.where(is_ex_source[None, :], 0.0, W)

    delay_steps = max(1, int(round(config.delay / dt)))
    changes: dict[int, list[ParamChange]] = {}
    for ch in config.param_changes:
        changes.setdefault(int(round(ch.time / dt)), []).append(ch)
    param_arrays = {"V_th": V_th, "E_L": E_L, "C_m": C_m, "t_ref": t_ref}

    s1_ex = np.zeros(n)
    s2_ex = np.zeros(n)
    s1_in = np.zeros(n)
    s2_in = np.zeros(n)
    refract = np.zeros(n)
    pending: dict[int, np.ndarray] = {}
    kick_ex = math.e / config.tau_syn_ex
    kick_in = math.e / config.tau_syn_in

    spikes: list[list[float]] = [[] for _ in range(n)]
    record_every = int(round(config.record_dt / dt))
    n_bins = config.steps // record_every
    if n_bins < 2:
        raise ConfigurationError("run too short for the requested record_dt")
    volt = np.empty((n_bins, n)) if config.export == "voltage" else None

    for step in range(config.steps):
        for ch in changes.get(step, ()):
            param_arrays[ch.parameter][ch.neuron] = ch.value

        arriving = pending.pop(step, None)
        if arriving is not None:
            s1_ex += kick_ex * np.where(arriving > 0, arriving, 0.0)
            s1_in += kick_in * np.where(arriving < 0, arriving, 0.0)

        I_syn = s2_ex + s2_in
        s2_ex += dt * (s1_ex - s2_ex) / config.tau_syn_ex
        s1_ex += dt * (-s1_ex / config.tau_syn_ex)
        s2_in += dt * (s1_in - s2_in) / config.tau_syn_in
        s1_in += dt * (-s1_in / config.tau_syn_in)

        I_total = I_e + I_syn
        if config.noise_std > 0:
            I_total = I_total + config.noise_std * rng.standard_normal(n)

        active = refract <= 0.0
        dV = (-(V - E_L) + I_total / C_m) / config.tau_m
        V = np.where(active, V + dt * dV, config.V_reset)
        V = np.maximum(V, config.V_min)
        refract = np.maximum(refract - dt, 0.0)
        if not np.all(np.isfinite(V)):
            raise SimulationBlowUpError(f"membrane potential non-finite at step {step}")

        fired = active & (V >= V_th)
        if np.any(fired):
            t_now = step * dt
            idx = np.nonzero(fired)[0]
            for j in idx:
                spikes[j].append(t_now)
            V[fired] = config.V_reset
            refract[fired] = t_ref[fired]
            contrib = W_ex[:, idx].sum(axis=1) + W_in[:, idx].sum(axis=1)
            slot = step + delay_steps
            if slot in pending:
                pending[slot] += contrib
            else:
                pending[slot] = contrib

        if volt is not None and (step + 1) % record_every == 0:
            volt[(step + 1) // record_every - 1] = V

    bin_centers = (np.arange(n_bins) + 0.5) * config.record_dt
    if config.export == "voltage":
        values = volt
    else:
        counts = np.zeros((n_bins, n))
        for j, times in enumerate(spikes):
            for t in times:
                b = int(t / config.record_dt)
                if b < n_bins:
                    counts[b, j] += 1.0
        rate_hz = counts / (config.record_dt / 1000.0)
        sigma_bins = config.smooth_sigma / config.record_dt
        if sigma_bins > 0:
            rate_hz = gaussian_filter1d(rate_hz, sigma_bins, axis=0, mode="nearest")
        values = rate_hz

    series = MultivariateTimeSeries(bin_centers, values)
    return Dataset((series,), {}, ground_truth=config.network.digraph)
