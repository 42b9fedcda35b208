"""Information-flow graph inference: causation entropy (OCE), conditional
transfer entropy (mTE) and normalized-ratio information flow (mMI).

All three share a single-lag (Markov) embedding: rows of ``past`` are
the per-series standardized levels X_t and rows of ``future`` are the
one-step increments X_{t+1} - X_t in their natural units.  Two facts
about the Gaussian plug-in make this the right pairing:

* with the target's own level in the conditioning set, predicting the
  increment gives exactly the same conditional entropy as predicting
  the next level (subtracting a regressor from the response leaves
  the residuals unchanged), so the increment target is a pure
  numerical stabilization, not a different quantity;
* conditional entropy is invariant to rescaling the *regressors* but
  shifts by log(scale) with the *target's* units.  Entropy differences
  (oce_graph, mte_graph) cancel that shift, but the ratio in mmi_graph
  does not, so the target has to stay in natural units: standardizing
  it subtracts the log of its spread and drives every conditional
  entropy negative on strongly predictable signals, which would empty
  the ratio measure.

Parent sets grow greedily per target; each admission must survive a
circular-shift permutation test.  Ties in the greedy argmax break
toward the lower vertex index, so results are deterministic.
"""

from __future__ import annotations

import warnings
from typing import Callable, Sequence

import numpy as np

from ..data import Dataset
from ..errors import InsufficientDataError
from ..graphs import WeightedDigraph
from .entropy import EntropyEstimatorConfig, conditional_entropy
from .significance import SignificanceConfig, permutation_significance

WEIGHT_FLOOR = 1e-12


def pooled_lag_matrices(dataset: Dataset
                        ) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """(standardized past levels, natural-unit future increments, rows
    contributed per series)."""
    pasts, futures, segments = [], [], []
    for s in dataset.series:
        if s.n_times < 3:
            raise InsufficientDataError("series too short for a lag embedding")
        levels = s.values
        std = levels.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)
        pasts.append(((levels - levels.mean(axis=0)) / std)[:-1])
        futures.append(np.diff(levels, axis=0))
        segments.append(s.n_times - 1)
    return (np.concatenate(pasts, axis=0), np.concatenate(futures, axis=0),
            tuple(segments))


def _cond(future_col: np.ndarray, past: np.ndarray, cols: Sequence[int],
          est: EntropyEstimatorConfig) -> float:
    cols = sorted(set(int(c) for c in cols))
    cond = past[:, cols] if cols else None
    return conditional_entropy(future_col[:, None], cond, est)


def _grow(target: int, past: np.ndarray, segments: Sequence[int],
          candidates: Sequence[int], gain_fn: Callable,
          est: EntropyEstimatorConfig, sig: SignificanceConfig,
          max_parents: int | None) -> list[tuple[int, float]]:
    """Greedy parent admission with permutation stopping.

    gain_fn(shifted_past, parents, j) -> statistic; the permutation null
    circularly shifts candidate j's past column only.
    """
    n = past.shape[1]
    cap = max_parents if max_parents is not None else n
    parents: list[int] = []
    admitted: list[tuple[int, float]] = []
    while len(parents) < cap:
        remaining = [j for j in candidates if j not in parents]
        if not remaining:
            break
        gains = []
        for j in remaining:
            gains.append((gain_fn(past, parents, j), j))
        best_gain, best_j = max(gains, key=lambda t: (t[0], -t[1]))
        if not np.isfinite(best_gain) or best_gain <= 0:
            break

        def evaluator(col: np.ndarray, j=best_j) -> float:
            shifted = past.copy()
            shifted[:, j] = col
            return gain_fn(shifted, parents, j)

        rng = np.random.default_rng([sig.seed, target, best_j, len(parents)])
        significant, _ = permutation_significance(
            evaluator, past[:, best_j], sig, rng, segments)
        if not significant:
            break
        parents.append(best_j)
        admitted.append((best_j, float(best_gain)))
    return admitted


def oce_graph(dataset: Dataset,
              est: EntropyEstimatorConfig = EntropyEstimatorConfig(),
              sig: SignificanceConfig = SignificanceConfig(),
              max_parents: int | None = None) -> WeightedDigraph:
    """Causation entropy: greedy growth then divisive pruning per target.

    C_{j->I|K} = h(I'|K) - h(I'|K,j); a candidate already in K scores
    exactly zero (both terms hit the same conditioning matrix).  The
    final weight of j is its causation entropy given the other parents.
    """
    past, future, segments = pooled_lag_matrices(dataset)
    n = past.shape[1]
    edges = []
    for target in range(n):
        fcol = future[:, target]

        def gain(p: np.ndarray, parents: Sequence[int], j: int,
                 fcol=fcol) -> float:
            base = _cond(fcol, p, parents, est)
            return base - _cond(fcol, p, list(parents) + [j], est)

        admitted = _grow(target, past, segments, range(n), gain, est, sig,
                         max_parents)
        parents = [j for j, _ in admitted]

        # divisive pruning: re-test each parent against the others
        for j in sorted(parents):
            rest = [k for k in parents if k != j]

            def evaluator(col: np.ndarray, j=j, rest=rest,
                          fcol=fcol) -> float:
                shifted = past.copy()
                shifted[:, j] = col
                return _cond(fcol, shifted, rest, est) \
                    - _cond(fcol, shifted, rest + [j], est)

            rng = np.random.default_rng([sig.seed, target, j, n + 1])
            significant, _ = permutation_significance(
                evaluator, past[:, j], sig, rng, segments)
            if not significant:
                parents.remove(j)

        for j in parents:
            rest = [k for k in parents if k != j]
            weight = _cond(fcol, past, rest, est) \
                - _cond(fcol, past, rest + [j], est)
            edges.append((j, target, max(weight, WEIGHT_FLOOR)))
    return WeightedDigraph(n, tuple(sorted(edges)))


def mte_graph(dataset: Dataset,
              est: EntropyEstimatorConfig = EntropyEstimatorConfig(),
              sig: SignificanceConfig = SignificanceConfig(),
              max_parents: int | None = None) -> WeightedDigraph:
    """Conditional transfer entropy with the target's own past always held.

    T_{i->j|Z} = h(j'|j,Z) - h(j'|j,Z,i); growth stops when no candidate
    contributes significantly.  Weight = transfer entropy at admission.
    """
    past, future, segments = pooled_lag_matrices(dataset)
    n = past.shape[1]
    edges = []
    for target in range(n):
        fcol = future[:, target]

        def gain(p: np.ndarray, parents: Sequence[int], i: int,
                 fcol=fcol, target=target) -> float:
            held = [target] + list(parents)
            return _cond(fcol, p, held, est) - _cond(fcol, p, held + [i], est)

        candidates = [i for i in range(n) if i != target]
        admitted = _grow(target, past, segments, candidates, gain, est, sig,
                         max_parents)
        for i, te in admitted:
            edges.append((i, target, max(te, WEIGHT_FLOOR)))
    return WeightedDigraph(n, tuple(sorted(edges)))


def mmi_graph(dataset: Dataset,
              est: EntropyEstimatorConfig = EntropyEstimatorConfig(),
              sig: SignificanceConfig = SignificanceConfig(),
              max_parents: int | None = None) -> WeightedDigraph:
    """Normalized information-flow ratio.

    Pairwise score C_{j->i} = 1 - h(i'|all)/h(i'|all but j); the greedy
    set form grows K by the gain of C_{K->i} = 1 - h(i'|all)/h(i'|all
    but K).  Because these are differential entropies the ratio can
    leave [0, 1]; candidates whose conditioning entropy is not positive
    are skipped with a warning rather than clamped.  Edge weight is the
    pairwise C of each admitted parent (floored at a tiny positive).
    """
    past, future, segments = pooled_lag_matrices(dataset)
    n = past.shape[1]
    all_cols = list(range(n))
    edges = []
    for target in range(n):
        fcol = future[:, target]
        h_full = _cond(fcol, past, all_cols, est)

        def ratio(p: np.ndarray, removed: Sequence[int],
                  fcol=fcol, target=target) -> float:
            kept = [c for c in all_cols if c not in set(removed)]
            numer = _cond(fcol, p, all_cols, est)
            denom = _cond(fcol, p, kept, est)
            if denom <= 0:
                return -np.inf
            return 1.0 - numer / denom

        skipped: set[int] = set()
        for j in range(n):
            if j == target:
                continue
            denom = _cond(fcol, past, [c for c in all_cols if c != j], est)
            if denom <= 0:
                warnings.warn(
                    f"nonpositive conditioning entropy for pair {j}->{target}; "
                    "pair skipped", RuntimeWarning)
                skipped.add(j)

        def gain(p: np.ndarray, parents: Sequence[int], j: int) -> float:
            with_j = ratio(p, list(parents) + [j])
            base = ratio(p, parents) if parents else 0.0
            if not np.isfinite(with_j) or not np.isfinite(base):
                return -np.inf
            return with_j - base

        candidates = [j for j in range(n) if j != target and j not in skipped]
        admitted = _grow(target, past, segments, candidates, gain, est, sig,
                         max_parents)
        for j, _ in admitted:
            denom = _cond(fcol, past, [c for c in all_cols if c != j], est)
            weight = 1.0 - h_full / denom
            edges.append((j, target, max(weight, WEIGHT_FLOOR)))
    return WeightedDigraph(n, tuple(sorted(edges)))
