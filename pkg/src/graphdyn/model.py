"""Space-and-time attention graph ODE for interaction-graph inference.

Architecture, per observation interval [t_k, t_k+1] of each series:

  1. Build an L-row lag window at t_k from the history buffer (observed
     values at training times, model predictions at held-out times,
     first observation before the series start).
  2. Score every supported ordered pair (receiver i, source j) with a
     two-layer tanh network on the interleaved pair window, then
     row-softmax over each receiver's support: the attention matrix
     alpha(t_k), held fixed through the interval.
  3. Aggregate g'_i = sum_delta l_delta * (sum_j alpha_ij * W x_j(t-delta))
     with a global softmax-normalized lag-weight vector l.
  4. Integrate dX_i/dt = f_theta(g'_i, t) with fixed-step RK4, appending
     each solver state to the history buffer (delay-ODE semantics).

Training minimizes  sum_i mean_t ||Xhat_i - X_i||^2
                    + lambda1 * mean_t ||alpha(t) - P||_F
                    + lambda2 * mean_t |alpha(t)|_1
summed over series (perturbed replicates enter with a configurable
weight) by momentum gradient descent through the unrolled solver.

Signals are standardized per vertex (training rows only) before fitting;
predictions are mapped back to the original scale.  All dense matrices
are receiver-major, matching graphs.py.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Node, ParameterStore, Tape
from .data import Dataset, MultivariateTimeSeries
from .errors import (ConfigurationError, DivergenceError, ExtrapolationError,
                     GridAlignmentError, InsufficientDataError,
                     SimulationBlowUpError)
from .graphs import (AttentionTrajectory, PriorGraph, WeightedDigraph,
                     binarize, time_average)
from .serialize import canonical_json


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters for train().

    solver_steps counts RK4 steps per grid cell; an observation interval
    spanning g cells (g > 1 when held-out points sit inside it) gets
    g * solver_steps steps, so every grid time lies on the solver grid.
    """

    lags: int = 4                 # L; window covers delta = 0..L-1 grid steps
    hidden: int = 16              # d, shared by both feed-forward nets
    lambda1: float = 0.1
    lambda2: float = 0.01
    epochs: int = 500
    learning_rate: float = 0.01
    momentum: float = 0.9
    clip_norm: float = 10.0
    solver_steps: int = 4
    perturb_weight: float = 1.0
    dense_support: bool = False   # allow all pairs; prior only pulls via lambda1
    normalize: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lags < 1 or self.hidden < 1:
            raise ConfigurationError("lags and hidden must be >= 1")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigurationError("lambda1 and lambda2 must be nonnegative")
        if self.solver_steps < 1:
            raise ConfigurationError("solver_steps must be >= 1")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be nonnegative")


def init_parameters(config: TrainConfig) -> ParameterStore:
    """Seeded uniform(-0.1, 0.1) initialization of every learnable array."""
    rng = np.random.default_rng(config.seed)
    L, d = config.lags, config.hidden
    store = ParameterStore()
    store.init_uniform("proj", (1, d), rng)
    store.init_uniform("lag_logits", (1, L), rng)
    store.init_uniform("att_w1", (d, 2 * L), rng)
    store.init_uniform("att_b1", (1, d), rng)
    store.init_uniform("att_w2", (1, d), rng)
    store.init_uniform("att_b2", (1, 1), rng)
    store.init_uniform("dyn_w1", (d, d + 1), rng)
    store.init_uniform("dyn_b1", (1, d), rng)
    store.init_uniform("dyn_w2", (1, d), rng)
    store.init_uniform("dyn_b2", (1, 1), rng)
    return store


class _Selectors:
    """Constant matrices that batch attention scoring over the support."""

    def __init__(self, mask: np.ndarray, lags: int) -> None:
        n = mask.shape[0]
        if not mask.any(axis=1).all():
            empty = int(np.nonzero(~mask.any(axis=1))[0][0])
            raise ConfigurationError(
                f"vertex {empty} has an empty support row (not even a self-loop)")
        pairs = [(i, j) for i in range(n) for j in range(n) if mask[i, j]]
        p = len(pairs)
        sel_recv = np.zeros((p, n))
        sel_src = np.zeros((p, n))
        scatter = np.zeros((n * n, p))
        for k, (i, j) in enumerate(pairs):
            sel_recv[k, i] = 1.0
            sel_src[k, j] = 1.0
            scatter[i * n + j, k] = 1.0
        perm = np.zeros((2 * lags, 2 * lags))
        for l in range(lags):
            perm[l, 2 * l] = 1.0
            perm[lags + l, 2 * l + 1] = 1.0
        self.n = n
        self.mask = mask
        self.sel_recv = sel_recv
        self.sel_src = sel_src
        self.scatter = scatter
        self.perm = perm


def _attention_node(leaves: Mapping[str, Node], window: Node,
                    sel: _Selectors) -> Node:
    """Masked attention matrix from an (L, n) lag-window node."""
    wt = ad.transpose(window)                                    # (n, L)
    left = ad.matmul(ad.constant(sel.sel_recv), wt)              # (p, L)
    right = ad.matmul(ad.constant(sel.sel_src), wt)
    feat = ad.matmul(ad.concat([left, right], axis=1),
                     ad.constant(sel.perm))                      # (p, 2L)
    h = ad.tanh(ad.add_rowvec(ad.matmul(feat, ad.transpose(leaves["att_w1"])),
                              leaves["att_b1"]))
    scores = ad.add_rowvec(ad.matmul(h, ad.transpose(leaves["att_w2"])),
                           leaves["att_b2"])                     # (p, 1)
    dense = ad.reshape(ad.matmul(ad.constant(sel.scatter), scores),
                       (sel.n, sel.n))
    return ad.masked_softmax(dense, sel.mask)


def compute_attention(params: ParameterStore | Mapping[str, Node],
                      window: np.ndarray | Node,
                      support_mask: np.ndarray) -> np.ndarray | Node:
    """Attention matrix for one lag window.

    Row i is a softmax over {j : support_mask[i, j]} of the pair scores;
    other entries are exactly zero.  Returns an array when given arrays,
    a Node when given nodes.
    """
    as_node = isinstance(window, Node)
    leaves = params.leaves() if isinstance(params, ParameterStore) else dict(params)
    win = window if as_node else ad.constant(np.asarray(window, dtype=float))
    lags = leaves["att_w1"].value.shape[1] // 2
    if win.value.shape[0] != lags:
        raise ConfigurationError(
            f"window has {win.value.shape[0]} rows, parameters expect {lags}")
    sel = _Selectors(np.asarray(support_mask, dtype=bool), lags)
    out = _attention_node(leaves, win, sel)
    return out if as_node else out.value


def _lag_weights(leaves: Mapping[str, Node]) -> Node:
    """Softmax-normalized temporal attention as an (L, 1) column."""
    L = leaves["lag_logits"].value.shape[1]
    row = ad.masked_softmax(leaves["lag_logits"], np.ones((1, L), dtype=bool))
    return ad.transpose(row)


def aggregate(leaves: Mapping[str, Node], attention: Node, window: Node,
              lag_col: Node | None = None) -> Node:
    """g' per vertex: lag-weighted, attention-weighted projected signals."""
    if lag_col is None:
        lag_col = _lag_weights(leaves)
    mixed = ad.matmul(attention, ad.transpose(window))        # (n, L)
    pooled = ad.matmul(mixed, lag_col)                        # (n, 1)
    return ad.matmul(pooled, leaves["proj"])                  # (n, d)


def dynamics(leaves: Mapping[str, Node], gprime: Node, t_norm: float) -> Node:
    """f_theta(g'_i, t) for every vertex at once; returns (n, 1)."""
    n = gprime.value.shape[0]
    t_col = ad.constant(np.full((n, 1), float(t_norm)))
    inp = ad.concat([gprime, t_col], axis=1)
    h = ad.tanh(ad.add_rowvec(ad.matmul(inp, ad.transpose(leaves["dyn_w1"])),
                              leaves["dyn_b1"]))
    return ad.add_rowvec(ad.matmul(h, ad.transpose(leaves["dyn_w2"])),
                         leaves["dyn_b2"])


def ode_rhs(leaves: Mapping[str, Node], state: Node, lagged_rows: Sequence[Node],
            attention: Node, t_norm: float, lag_col: Node | None = None) -> Node:
    """dX/dt as a (1, n) row: rebuild the window, aggregate, apply f_theta.

    ``state`` is the lag-0 row; ``lagged_rows`` supply lags 1..L-1 from
    the history buffer.  The attention matrix stays fixed across the
    observation interval, per the training scheme.
    """
    window = ad.concat([state, *lagged_rows], axis=0)
    gp = aggregate(leaves, attention, window, lag_col)
    return ad.transpose(dynamics(leaves, gp, t_norm))


def ode_solve(rhs: Callable[[Node, float], Node], y0: Node, t0: float,
              t1: float, steps: int,
              on_step: Callable[[int, float, Node], None] | None = None
              ) -> list[tuple[float, Node]]:
    """Classical fixed-step RK4 from t0 to t1.

    Returns [(t, state)] including both endpoints.  on_step fires after
    each completed step with (step_index, time, state).
    """
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    if not t1 > t0:
        raise ConfigurationError("t1 must exceed t0")
    h = (t1 - t0) / steps
    out = [(t0, y0)]
    y = y0
    for k in range(steps):
        t = t0 + k * h
        k1 = rhs(y, t)
        k2 = rhs(ad.add_scaled(y, k1, 0.5 * h), t + 0.5 * h)
        k3 = rhs(ad.add_scaled(y, k2, 0.5 * h), t + 0.5 * h)
        k4 = rhs(ad.add_scaled(y, k3, h), t + h)
        y = ad.add_scaled(ad.add_scaled(ad.add_scaled(ad.add_scaled(
            y, k1, h / 6.0), k2, h / 3.0), k3, h / 3.0), k4, h / 6.0)
        if not np.all(np.isfinite(y.value)):
            raise SimulationBlowUpError(f"solver state non-finite at step {k + 1}")
        if on_step is not None:
            on_step(k + 1, t0 + (k + 1) * h, y)
        out.append((t0 + (k + 1) * h, y))
    return out


class _SeriesContext:
    """Everything fixed about one series during one forward pass."""

    def __init__(self, series: MultivariateTimeSeries, values_norm: np.ndarray,
                 train_idx: np.ndarray, weight: float) -> None:
        self.times = series.times
        self.values = values_norm
        self.train_idx = np.asarray(train_idx, dtype=int)
        self.weight = float(weight)
        self.span = float(series.times[-1] - series.times[0])


def _series_forward(leaves: Mapping[str, Node], ctx: _SeriesContext,
                    sel: _Selectors, config: TrainConfig, prior_dense: np.ndarray,
                    lag_col: Node, collect: dict | None = None
                    ) -> tuple[Node, list[Node]]:
    """Integrate one series across its training intervals.

    Returns (loss_node, attention_snapshot_nodes).  ``collect``, when
    given, receives grid-index -> (1, n) prediction node for every grid
    point after the first.
    """
    S = config.solver_steps
    L = config.lags
    T = len(ctx.times)
    n = ctx.values.shape[1]
    span = ctx.span if ctx.span > 0 else 1.0

    obs = [ad.constant(ctx.values[g][None, :]) for g in range(T)]
    buffer: dict[int, Node] = {0: obs[0]}

    def lag_row(idx_f: float) -> Node:
        # idx_f counts solver steps from the series start; values before
        # the start repeat the first observation
        if idx_f <= 0:
            return obs[0]
        lo = int(np.floor(idx_f + 1e-9))
        hi = int(np.ceil(idx_f - 1e-9))
        a = buffer.get(lo, obs[0] if lo <= 0 else None)
        if hi == lo:
            if a is None:
                raise RuntimeError(f"history missing solver index {lo}")
            return a
        b = buffer.get(hi)
        if a is None or b is None:
            raise RuntimeError(f"history missing around solver index {idx_f}")
        return ad.add_scaled(ad.scale(a, 0.5), b, 0.5)

    def rhs_factory(att: Node):
        def rhs(y: Node, t: float) -> Node:
            idx_f = (t - ctx.times[0]) / (ctx.times[1] - ctx.times[0]) * S
            lagged = [lag_row(idx_f - l * S) for l in range(1, L)]
            return ode_rhs(leaves, y, lagged, att,
                           (t - ctx.times[0]) / span, lag_col)
        return rhs

    att_snaps: list[Node] = []
    pred_err_sum: Node | None = None
    n_pred = 0
    train_set = set(int(g) for g in ctx.train_idx)

    for a, b in zip(ctx.train_idx[:-1], ctx.train_idx[1:]):
        a, b = int(a), int(b)
        win_rows = [lag_row((a - l) * S) for l in range(L)]
        att = _attention_node(leaves, ad.concat(win_rows, axis=0), sel)
        att_snaps.append(att)

        state = buffer[a * S]
        steps = S * (b - a)
        base = a * S

        def on_step(k: int, t: float, y: Node, base=base) -> None:
            m = base + k
            buffer[m] = y
            if m % S == 0:
                g = m // S
                if collect is not None:
                    collect[g] = y
                if g in train_set:
                    nonlocal pred_err_sum, n_pred
                    err = ad.sumsq(ad.sub(y, obs[g]))
                    pred_err_sum = err if pred_err_sum is None \
                        else ad.add(pred_err_sum, err)
                    n_pred += 1
                    buffer[m] = obs[g]       # teacher forcing

        ode_solve(rhs_factory(att), state, float(ctx.times[a]),
                  float(ctx.times[b]), steps, on_step)

    if pred_err_sum is None:
        raise InsufficientDataError("series has fewer than two training points")
    mse = ad.scale(pred_err_sum, 1.0 / n_pred)

    prior_const = ad.constant(prior_dense)
    fro_sum: Node | None = None
    l1_sum: Node | None = None
    for att in att_snaps:
        fro = ad.sqrt(ad.sumsq(ad.sub(att, prior_const)))
        l1 = ad.abssum(att)
        fro_sum = fro if fro_sum is None else ad.add(fro_sum, fro)
        l1_sum = l1 if l1_sum is None else ad.add(l1_sum, l1)
    loss = mse
    if config.lambda1 > 0:
        loss = ad.add(loss, ad.scale(fro_sum, config.lambda1 / len(att_snaps)))
    if config.lambda2 > 0:
        loss = ad.add(loss, ad.scale(l1_sum, config.lambda2 / len(att_snaps)))
    return loss, att_snaps


def composite_loss(mse: float, fro: float, l1: float,
                   lambda1: float, lambda2: float) -> float:
    """The scalar training objective from its three components."""
    return mse + lambda1 * fro + lambda2 * l1


def map_energy(mse: float, fro: float, l1: float, beta: float,
               alpha_mix: float, sigma_sq: float = 0.5,
               log_normalizer: float = 0.0) -> float:
    """Negative log posterior of the Gaussian-likelihood, Boltzmann-prior view.

    With sigma_sq = 1/2 and lambda1 = beta*alpha_mix,
    lambda2 = beta*(1 - alpha_mix), this equals composite_loss plus the
    constant log_normalizer; the training objective is MAP estimation.
    """
    return mse / (2.0 * sigma_sq) \
        + beta * (alpha_mix * fro + (1.0 - alpha_mix) * l1) + log_normalizer


@dataclass(frozen=True)
class TrainedModel:
    store: ParameterStore
    config: TrainConfig
    prior: PriorGraph
    support_mask: np.ndarray
    norm_mean: np.ndarray
    norm_std: np.ndarray
    attention: AttentionTrajectory
    loss_history: tuple[float, ...]
    train_indices: tuple[int, ...]

    def parameters(self) -> dict[str, np.ndarray]:
        return {name: self.store.get(name) for name in self.store.names()}


def _normalization(dataset: Dataset, train_idx: np.ndarray,
                   enabled: bool) -> tuple[np.ndarray, np.ndarray]:
    n = dataset.n_vertices
    if not enabled:
        return np.zeros(n), np.ones(n)
    rows = np.concatenate([s.values[train_idx] for s in dataset.series], axis=0)
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return mean, std


def _contexts(dataset: Dataset, train_idx: np.ndarray, mean: np.ndarray,
              std: np.ndarray, config: TrainConfig) -> list[_SeriesContext]:
    out = []
    for k, s in enumerate(dataset.series):
        weight = config.perturb_weight if dataset.is_perturbed(k) else 1.0
        out.append(_SeriesContext(s, (s.values - mean) / std, train_idx, weight))
    return out


def _resolve_prior(dataset: Dataset, prior: PriorGraph | None) -> PriorGraph:
    if prior is not None:
        return prior
    if dataset.prior is not None:
        return dataset.prior
    # fall back to a time-lagged Granger scan to seed the support; lag
    # order adapts downward so short series stay above the F-test's
    # sample-size floor (length > 3p + 2).  The scan runs strict
    # (Bonferroni at alpha=1e-3): attention spreads mass over whatever
    # support it is given, so spurious candidates survive thresholding
    # far more often than a tight scan misses a real edge, and the
    # prior graph always keeps self-loops as a fallback path.
    from .baselines.granger import granger_graph
    min_times = min(s.n_times for s in dataset.series)
    lags = min(5, (min_times - 3) // 3)
    if lags < 1:
        raise InsufficientDataError(
            "series too short to seed a prior from a lagged scan")
    gc = granger_graph(dataset, lags=lags, alpha=1e-3, bonferroni=True)
    unit = WeightedDigraph(gc.n, tuple((s, d, 1.0) for s, d, _ in gc.edges))
    return PriorGraph(unit)


def train(dataset: Dataset, prior: PriorGraph | None = None,
          config: TrainConfig = TrainConfig(),
          train_indices: Sequence[int] | None = None) -> TrainedModel:
    """Fit the model; see the module docstring for the objective.

    train_indices selects the observation grid (defaults to every
    timepoint); held-out indices are bridged by the solver, which makes
    predict() interpolate to them.
    """
    prior = _resolve_prior(dataset, prior)
    if prior.n != dataset.n_vertices:
        raise ConfigurationError("prior size does not match the dataset")
    T = dataset.series[0].n_times
    if train_indices is None:
        train_idx = np.arange(T)
    else:
        train_idx = np.asarray(sorted(int(i) for i in train_indices), dtype=int)
        if train_idx[0] != 0 or train_idx[-1] != T - 1 or len(train_idx) < 2:
            raise ConfigurationError(
                "training indices must include both endpoints (held-out points "
                "are interior)")

    mask = np.ones((prior.n, prior.n), dtype=bool) if config.dense_support \
        else prior.support_mask()
    sel = _Selectors(mask, config.lags)
    prior_dense = prior.dense_adjacency()
    mean, std = _normalization(dataset, train_idx, config.normalize)
    contexts = _contexts(dataset, train_idx, mean, std, config)
    total_weight = sum(c.weight for c in contexts)

    store = init_parameters(config)
    history: list[float] = []

    def forward(leaves: Mapping[str, Node]) -> tuple[Node, list[Node]]:
        lag_col = _lag_weights(leaves)
        loss_total: Node | None = None
        base_snaps: list[Node] = []
        for k, ctx in enumerate(contexts):
            loss_k, snaps = _series_forward(leaves, ctx, sel, config,
                                            prior_dense, lag_col)
            weighted = ad.scale(loss_k, ctx.weight / total_weight)
            loss_total = weighted if loss_total is None \
                else ad.add(loss_total, weighted)
            if k == 0:
                base_snaps = snaps
        return loss_total, base_snaps

    for epoch in range(config.epochs):
        with Tape() as tape:
            leaves = store.leaves()
            loss, _ = forward(leaves)
            if not np.isfinite(loss.value):
                raise DivergenceError(f"loss became non-finite at epoch {epoch}")
            history.append(float(loss.value))
            tape.backward(loss)
        store.step(leaves, config.learning_rate, config.momentum,
                   config.clip_norm)

    # value-only pass for the final attention trajectory (and loss logging)
    leaves = store.leaves()
    loss, snaps = forward(leaves)
    if not np.isfinite(loss.value):
        raise DivergenceError(f"loss became non-finite at epoch {config.epochs}")
    history.append(float(loss.value))
    att_times = [float(dataset.series[0].times[g]) for g in train_idx[:-1]]
    traj = AttentionTrajectory(tuple(att_times),
                               tuple(s.value.copy() for s in snaps),
                               frozenset(prior.support) if not config.dense_support
                               else None)
    return TrainedModel(store, config, prior, mask, mean, std, traj,
                        tuple(history), tuple(int(i) for i in train_idx))


def _replay(model: TrainedModel, series: MultivariateTimeSeries,
            teacher_until: float | None = None,
            inject: tuple[int, int, float] | None = None) -> np.ndarray:
    """Value-mode pass over one series; returns normalized predictions (T, n).

    Teacher forcing applies at training indices up to ``teacher_until``
    (a grid index; None = everywhere).  ``inject`` = (grid_index, vertex,
    normalized epsilon) bumps the buffer entry at that point.  Row 0 is
    the (possibly bumped) first observation; later rows are solver
    outputs at each grid time.
    """
    config = model.config
    ctx = _SeriesContext(series, (series.values - model.norm_mean) / model.norm_std,
                         np.asarray(model.train_indices), 1.0)
    sel = _Selectors(model.support_mask, config.lags)
    leaves = model.store.leaves()
    lag_col = _lag_weights(leaves)
    S = config.solver_steps
    L = config.lags
    T = len(ctx.times)
    limit = T - 1 if teacher_until is None else int(teacher_until)

    values = ctx.values.copy()
    if inject is not None and inject[0] == 0:
        values[0, inject[1]] += inject[2]
    obs = [ad.constant(values[g][None, :]) for g in range(T)]
    buffer: dict[int, Node] = {0: obs[0]}
    preds = np.full((T, ctx.values.shape[1]), np.nan)
    preds[0] = values[0]
    span = ctx.span if ctx.span > 0 else 1.0

    def lag_row(idx_f: float) -> Node:
        if idx_f <= 0:
            return obs[0]
        lo = int(np.floor(idx_f + 1e-9))
        hi = int(np.ceil(idx_f - 1e-9))
        a = buffer[lo] if lo in buffer else obs[0]
        if hi == lo:
            return a
        b = buffer[hi]
        return ad.add_scaled(ad.scale(a, 0.5), b, 0.5)

    def rhs_factory(att: Node):
        def rhs(y: Node, t: float) -> Node:
            idx_f = (t - ctx.times[0]) / (ctx.times[1] - ctx.times[0]) * S
            lagged = [lag_row(idx_f - l * S) for l in range(1, L)]
            return ode_rhs(leaves, y, lagged, att,
                           (t - ctx.times[0]) / span, lag_col)
        return rhs

    train_set = set(int(g) for g in model.train_indices)
    anchors = sorted(train_set)
    for a, b in zip(anchors[:-1], anchors[1:]):
        win_rows = [lag_row((a - l) * S) for l in range(L)]
        att = _attention_node(leaves, ad.concat(win_rows, axis=0), sel)
        base = a * S

        def on_step(k: int, t: float, y: Node, base=base) -> None:
            m = base + k
            buffer[m] = y
            if m % S == 0:
                g = m // S
                preds[g] = y.value[0]
                if g in train_set and g <= limit:
                    node = obs[g]
                    if inject is not None and inject[0] == g:
                        bump = np.zeros_like(values[g])
                        bump[inject[1]] = inject[2]
                        node = ad.constant(values[g][None, :] + bump[None, :])
                    buffer[m] = node

        ode_solve(rhs_factory(att), buffer[a * S], float(ctx.times[a]),
                  float(ctx.times[b]), S * (b - a), on_step)
    return preds


def predict(model: TrainedModel, dataset: Dataset,
            query_times: Sequence[float]) -> list[np.ndarray]:
    """Model trajectories at grid-aligned query times, one array per series.

    Integration runs from the nearest preceding training observation, so
    held-out grid points come out interpolated.  Queries outside the
    observed span raise; off-grid queries are rejected.
    """
    out = []
    for series in dataset.series:
        for q in query_times:
            if q < series.times[0] - 1e-9 or q > series.times[-1] + 1e-9:
                raise ExtrapolationError(
                    f"query time {q} outside the span "
                    f"[{series.times[0]}, {series.times[-1]}]")
        idx = [series.grid_index(float(q)) for q in query_times]
        preds = _replay(model, series)
        rows = preds[idx] * model.norm_std + model.norm_mean
        out.append(rows)
    return out


def extract_graphs(model: TrainedModel, threshold: float = 0.1
                   ) -> tuple[AttentionTrajectory, WeightedDigraph]:
    """(dynamic graph, static graph) from the learned attention.

    Dynamic: each per-interval snapshot binarized at the threshold.
    Static: the time-averaged attention, binarized at the threshold.
    """
    binarized = tuple(binarize(s, threshold).adjacency()
                      for s in model.attention.snapshots)
    dynamic = AttentionTrajectory(model.attention.times, binarized)
    static = binarize(time_average(model.attention), threshold)
    return dynamic, static


def hysteresis_index(model: TrainedModel) -> float:
    """Variance of the lag-index distribution under temporal attention l."""
    logits = model.store.get("lag_logits")[0]
    e = np.exp(logits - logits.max())
    l = e / e.sum()
    idx = np.arange(len(l), dtype=float)
    mean = float((l * idx).sum())
    return float((l * idx * idx).sum() - mean * mean)


def sensitivity_check(model: TrainedModel, dataset: Dataset, vertex: int,
                      epsilon: float, t_p: float | None = None,
                      series_index: int = 0) -> float:
    """Correlation between perturbation response and attention, at one vertex.

    Runs the model twice on the chosen series, teacher-forced up to t_p
    and free-running after; the second run bumps the state at (t_p,
    vertex) by epsilon (original units).  The per-vertex summed absolute
    response over later grid times is correlated (Pearson) against the
    time-averaged attention each supported out-neighbor pays to
    ``vertex``.
    """
    if epsilon == 0:
        raise ConfigurationError("epsilon must be nonzero (zero response is undefined)")
    if not 0 <= vertex < dataset.n_vertices:
        raise ConfigurationError(f"vertex {vertex} out of range")
    series = dataset.series[series_index]
    if t_p is None:
        k = model.train_indices[max(1, len(model.train_indices) // 4)]
    else:
        k = series.grid_index(t_p)
        if k not in model.train_indices:
            raise GridAlignmentError(f"t_p={t_p} is not a training time")

    support = model.support_mask
    neighbors = [j for j in range(dataset.n_vertices)
                 if j != vertex and support[j, vertex]]
    if len(neighbors) < 3:
        raise InsufficientDataError(
            f"vertex {vertex} has {len(neighbors)} supported out-neighbors; "
            "need at least 3")

    eps_norm = epsilon / model.norm_std[vertex]
    base = _replay(model, series, teacher_until=k)
    bumped = _replay(model, series, teacher_until=k,
                     inject=(int(k), int(vertex), float(eps_norm)))
    later = np.arange(k + 1, series.n_times)
    response = np.abs(bumped[later] - base[later]).sum(axis=0)

    avg_att = np.mean(np.stack(model.attention.snapshots), axis=0)
    s_vec = response[neighbors]
    a_vec = avg_att[neighbors, vertex]
    if np.allclose(s_vec.std(), 0) or np.allclose(a_vec.std(), 0):
        raise InsufficientDataError(
            "sensitivity or attention is constant across neighbors")
    return float(np.corrcoef(s_vec, a_vec)[0, 1])


def save_model(model: TrainedModel, path: str | Path) -> None:
    cfg = model.config
    doc = {
        "parameters": model.store.to_json_dict(),
        "config": {
            "lags": cfg.lags, "hidden": cfg.hidden,
            "lambda1": cfg.lambda1, "lambda2": cfg.lambda2,
            "epochs": cfg.epochs, "learning_rate": cfg.learning_rate,
            "momentum": cfg.momentum, "clip_norm": cfg.clip_norm,
            "solver_steps": cfg.solver_steps,
            "perturb_weight": cfg.perturb_weight,
            "dense_support": cfg.dense_support,
            "normalize": cfg.normalize, "seed": cfg.seed,
        },
        "prior": model.prior.digraph.to_json_dict(),
        "prior_support": sorted([s, d] for s, d in model.prior.support),
        "norm_mean": [float(v) for v in model.norm_mean],
        "norm_std": [float(v) for v in model.norm_std],
        "attention": model.attention.to_json_dict(),
        "loss_history": [float(v) for v in model.loss_history],
        "train_indices": [int(i) for i in model.train_indices],
    }
    Path(path).write_text(canonical_json(doc, indent=2) + "\n")


def load_model(path: str | Path) -> TrainedModel:
    doc = json.loads(Path(path).read_text())
    config = TrainConfig(**doc["config"])
    store = ParameterStore.from_json_dict(doc["parameters"])
    prior = PriorGraph(WeightedDigraph.from_json_dict(doc["prior"]),
                       frozenset((int(s), int(d)) for s, d in doc["prior_support"]))
    mask = np.ones((prior.n, prior.n), dtype=bool) if config.dense_support \
        else prior.support_mask()
    traj = AttentionTrajectory.from_json_dict(doc["attention"])
    traj = AttentionTrajectory(traj.times, traj.snapshots,
                               None if config.dense_support
                               else frozenset(prior.support))
    return TrainedModel(store, config, prior, mask,
                        np.array(doc["norm_mean"], dtype=float),
                        np.array(doc["norm_std"], dtype=float),
                        traj, tuple(doc["loss_history"]),
                        tuple(doc["train_indices"]))
