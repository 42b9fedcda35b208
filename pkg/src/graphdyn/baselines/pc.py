"""Constraint-based structure learning with Fisher-z partial correlation.

Stable-skeleton variant: within one conditioning level every pair is
tested against the neighbor sets frozen at the start of that level, so
the result does not depend on edge-removal order.  After the skeleton,
unshielded colliders are oriented from the recorded separating sets and
the usual three propagation rules run to a fixed point.  Edges that end
up undirected are exported in both directions; no orientation is ever
applied if it would close a directed cycle.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy import stats

from ..data import Dataset
from ..errors import CollinearityError, InsufficientDataError
from ..graphs import WeightedDigraph


def fisher_z_pvalue(corr: np.ndarray, m: int, i: int, j: int,
                    cond: tuple[int, ...]) -> float:
    """Two-sided p-value for partial correlation of i, j given cond."""
    dof = m - len(cond) - 3
    if dof <= 0:
        raise InsufficientDataError(
            f"{m} samples cannot support conditioning sets of size {len(cond)}")
    idx = [i, j, *cond]
    sub = corr[np.ix_(idx, idx)]
    try:
        prec = np.linalg.inv(sub)
    except np.linalg.LinAlgError:
        raise CollinearityError(
            f"singular correlation submatrix for pair ({i}, {j})") from None
    r = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
    r = float(np.clip(r, -1.0 + 1e-12, 1.0 - 1e-12))
    stat = np.sqrt(dof) * abs(np.arctanh(r))
    return float(2.0 * stats.norm.sf(stat))


def _pooled_rows(dataset: Dataset) -> np.ndarray:
    rows = []
    for s in dataset.series:
        std = s.values.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)
        rows.append((s.values - s.values.mean(axis=0)) / std)
    return np.concatenate(rows, axis=0)


def pc_graph(dataset: Dataset, alpha: float = 0.05,
             max_condition: int | None = None) -> WeightedDigraph:
    """Skeleton + collider orientation + propagation.

    Directed edges get weight 1.0; edges the procedure cannot orient are
    emitted in both directions with weight 1.0.
    """
    data = _pooled_rows(dataset)
    m, n = data.shape
    corr = np.corrcoef(data, rowvar=False)

    adj: dict[int, set[int]] = {i: set(range(n)) - {i} for i in range(n)}
    sepset: dict[tuple[int, int], frozenset[int]] = {}
    cap = n - 2 if max_condition is None else max_condition

    level = 0
    while level <= cap:
        snapshot = {i: sorted(adj[i]) for i in range(n)}
        tested_any = False
        for i in range(n):
            for j in snapshot[i]:
                if j not in adj[i]:
                    continue
                candidates = [k for k in snapshot[i] if k != j]
                if len(candidates) < level:
                    continue
                tested_any = True
                for cond in combinations(candidates, level):
                    if fisher_z_pvalue(corr, m, i, j, cond) > alpha:
                        adj[i].discard(j)
                        adj[j].discard(i)
                        sepset[(i, j)] = sepset[(j, i)] = frozenset(cond)
                        break
        if not tested_any:
            break
        level += 1

    directed: set[tuple[int, int]] = set()

    def reachable(src: int, dst: int) -> bool:
        seen, stack = {src}, [src]
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            for a, b in directed:
                if a == u and b not in seen:
                    seen.add(b)
                    stack.append(b)
        return False

    def orient(i: int, j: int) -> None:
        # refuse 2-cycles and anything that closes a directed cycle
        if (i, j) in directed or (j, i) in directed or reachable(j, i):
            return
        directed.add((i, j))

    def undirected(i: int, j: int) -> bool:
        return j in adj[i] and (i, j) not in directed \
            and (j, i) not in directed

    # unshielded colliders: i - k - j with i, j nonadjacent and k outside
    # the set that separated them
    for k in range(n):
        for i, j in combinations(sorted(adj[k]), 2):
            if j in adj[i]:
                continue
            if k not in sepset.get((i, j), frozenset()):
                orient(i, k)
                orient(j, k)

    changed = True
    while changed:
        changed = False
        before = len(directed)
        for i, k in sorted(directed):
            # i -> k, k - j, i and j nonadjacent: avoid a new collider
            for j in sorted(adj[k]):
                if j != i and j not in adj[i] and undirected(k, j):
                    orient(k, j)
        for i in range(n):
            for j in sorted(adj[i]):
                if not undirected(i, j):
                    continue
                # i -> k -> j with i - j: acyclicity forces i -> j
                for k in range(n):
                    if (i, k) in directed and (k, j) in directed:
                        orient(i, j)
                        break
                else:
                    # two nonadjacent parents of j both linked to i
                    parents = [k for k in range(n)
                               if (k, j) in directed and undirected(i, k)]
                    for p, q in combinations(parents, 2):
                        if p not in adj[q]:
                            orient(i, j)
                            break
        changed = len(directed) > before

    edges = []
    for i, j in directed:
        edges.append((i, j, 1.0))
    for i in range(n):
        for j in adj[i]:
            if undirected(i, j):
                edges.append((i, j, 1.0))
    return WeightedDigraph(n, tuple(sorted(edges)))
