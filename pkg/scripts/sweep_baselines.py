"""Grid-scan baseline settings on the five-node benchmark datasets."""
import itertools
import time

import numpy as np

from graphdyn import granger_graph, graph_edit_distance, mmi_graph, \
    mte_graph, oce_graph, pc_graph
from graphdyn.baselines import EntropyEstimatorConfig, SignificanceConfig
from graphdyn.bench import DEFAULT_FIVE_NODE, make_dataset

SEEDS = (0, 1, 2, 3, 4)
datasets = {s: make_dataset("five_node", DEFAULT_FIVE_NODE, s) for s in SEEDS}
truth = {s: datasets[s].ground_truth for s in SEEDS}


def report(label, fn):
    geds, t0 = [], time.perf_counter()
    for s in SEEDS:
        try:
            g = fn(datasets[s], s)
            geds.append(graph_edit_distance(g, truth[s]))
        except Exception as exc:
            geds.append(f"FAIL:{type(exc).__name__}")
    dt = time.perf_counter() - t0
    ok = [g for g in geds if isinstance(g, int)]
    mean = np.mean(ok) if ok else float("nan")
    print(f"{label:55s} geds={geds} mean={mean:.2f} ({dt:.1f}s)", flush=True)


for lags, alpha in itertools.product((3, 4, 5), (1e-2, 1e-3, 1e-4, 1e-6)):
    report(f"gc lags={lags} alpha={alpha}",
           lambda d, s, lags=lags, alpha=alpha:
           granger_graph(d, lags=lags, alpha=alpha))

for n_perm, alpha in ((100, 0.05), (200, 0.02), (200, 0.01)):
    sigf = lambda s: SignificanceConfig(n_perm=n_perm, alpha=alpha, seed=s)
    est = EntropyEstimatorConfig()
    report(f"mmi n_perm={n_perm} alpha={alpha}",
           lambda d, s, sigf=sigf: mmi_graph(d, est, sigf(s)))
    report(f"oce n_perm={n_perm} alpha={alpha}",
           lambda d, s, sigf=sigf: oce_graph(d, est, sigf(s)))
    report(f"mte n_perm={n_perm} alpha={alpha}",
           lambda d, s, sigf=sigf: mte_graph(d, est, sigf(s)))

for alpha in (0.05, 0.01):
    for dmax in (2, 3):
        report(f"pc alpha={alpha} dmax={dmax}",
               lambda d, s, alpha=alpha, dmax=dmax:
               pc_graph(d, alpha=alpha, max_condition=dmax))
