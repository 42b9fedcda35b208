"""Pairwise Granger causality via vector autoregression F-tests.

For each ordered pair (x, y): regress y_t on p of its own lags (null)
and additionally on p lags of x (full); the F-test on the residual sum
of squares decides the edge x -> y.  Series are standardized per vertex
before regression (the test statistic is scale-invariant; this only
conditions the linear algebra).  Multiple series are pooled.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from ..data import Dataset
from ..errors import CollinearityError, InsufficientDataError
from ..graphs import WeightedDigraph

F_CAP = 1e12  # stand-in weight when a residual hits exactly zero


def _standardized(values: np.ndarray) -> np.ndarray:
    std = values.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return (values - values.mean(axis=0)) / std


def _lag_design(values: np.ndarray, lags: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows t = lags..T-1: (lagged block [t-1..t-lags] per vertex, current)."""
    T, n = values.shape
    cols = [values[lags - l:T - l] for l in range(1, lags + 1)]
    past = np.stack(cols, axis=2)          # (m, n, lags)
    return past, values[lags:]


def granger_graph(dataset: Dataset, lags: int = 5, alpha: float = 0.01,
                  bonferroni: bool = True) -> WeightedDigraph:
    """Edge x->y iff the F-test rejects at alpha (Bonferroni over N(N-1))."""
    n = dataset.n_vertices
    pasts, futures = [], []
    for s in dataset.series:
        if s.n_times <= 3 * lags + 2:
            raise InsufficientDataError(
                f"series of length {s.n_times} too short for lag order {lags}")
        past, future = _lag_design(_standardized(s.values), lags)
        pasts.append(past)
        futures.append(future)
    past = np.concatenate(pasts, axis=0)
    future = np.concatenate(futures, axis=0)
    m = past.shape[0]
    dof2 = m - 2 * lags - 1
    if dof2 <= 0:
        raise InsufficientDataError("not enough pooled samples for the full model")
    threshold = alpha / (n * (n - 1)) if bonferroni else alpha
    intercept = np.ones((m, 1))

    def rss(design: np.ndarray, target: np.ndarray, pair: str) -> float:
        coef, residuals, rank, _ = np.linalg.lstsq(design, target, rcond=None)
        if rank < design.shape[1]:
            raise CollinearityError(f"rank-deficient design for pair {pair}")
        resid = target - design @ coef
        return float(resid @ resid)

    edges = []
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            pair = f"{x}->{y}"
            own = past[:, y, :]
            null_design = np.concatenate([intercept, own], axis=1)
            full_design = np.concatenate([intercept, own, past[:, x, :]], axis=1)
            rss0 = rss(null_design, future[:, y], pair)
            rss1 = rss(full_design, future[:, y], pair)
            if rss1 <= 0.0:
                f_stat, p_value = F_CAP, 0.0
            else:
                f_stat = ((rss0 - rss1) / lags) / (rss1 / dof2)
                f_stat = max(f_stat, 0.0)
                p_value = float(stats.f.sf(f_stat, lags, dof2))
            if p_value < threshold:
                edges.append((x, y, float(min(max(f_stat, 1e-12), F_CAP))))
    return WeightedDigraph(n, tuple(edges))
