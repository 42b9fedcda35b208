"""Command-line interface: simulate, infer, baseline, evaluate, bench.

Every subcommand reads and writes the dataset-directory and graph-JSON
formats described in `data` and `graphs`.  Exit code 0 on success, 2 on
a domain error (bad config, malformed file, impossible request).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import bench as bench_mod
from .baselines import granger_graph, mmi_graph, mte_graph, oce_graph, pc_graph
from .baselines import EntropyEstimatorConfig, SignificanceConfig
from .data import load_dataset, save_dataset
from .errors import ConfigurationError, GraphDynError
from .graphs import PriorGraph, WeightedDigraph
from .model import (TrainConfig, extract_graphs, hysteresis_index, predict,
                    save_model, train)
from .serialize import canonical_json, format_float

SYSTEM_ALIASES = {"five-node": "five_node", "wilson-cowan": "wilson_cowan",
                  "iaf": "iaf", "dmf": "dmf"}


def _add_simulate(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("simulate", help="generate a benchmark dataset")
    p.add_argument("--system", required=True, choices=sorted(SYSTEM_ALIASES))
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=Path, default=None,
                   help="JSON file of extra simulator options, e.g. "
                        '{"perturbations": [...]} or {"param_changes": [...]}')
    p.add_argument("--options", type=str, default=None,
                   help="inline JSON object of extra simulator options")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_simulate)


def _cmd_simulate(args: argparse.Namespace) -> int:
    system = SYSTEM_ALIASES[args.system]
    options: dict[str, Any] = {}
    if args.steps is not None:
        options["steps"] = args.steps
    if args.nodes is not None:
        if system == "five_node":
            if args.nodes != 5:
                raise ConfigurationError("the five-node system is fixed at 5")
        else:
            options["n"] = args.nodes
    if args.dt is not None:
        if system == "five_node":
            raise ConfigurationError("the five-node system is fixed at dt=1")
        options["dt"] = args.dt
    if args.noise is not None:
        key = {"five_node": "noise_sigma", "dmf": "sigma",
               "iaf": "noise_std"}.get(system)
        if key is None:
            raise ConfigurationError(
                f"{args.system} has no noise amplitude parameter")
        options[key] = args.noise
    for blob in (args.perturb.read_text() if args.perturb else None,
                 args.options):
        if blob:
            extra = json.loads(blob)
            if not isinstance(extra, dict):
                raise ConfigurationError("extra options must be a JSON object")
            options.update(extra)
    dataset = bench_mod.make_dataset(system, options, args.seed)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset.series)} series of "
          f"{dataset.series[0].n_times} x {dataset.n_vertices} to {args.out}")
    return 0


def _add_infer(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("infer", help="train the attention graph-ODE model")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--prior", type=str, default="auto-gc",
                   help="graph JSON file, or 'auto-gc' to use the dataset's "
                        "stored prior when present and a lagged regression "
                        "scan otherwise")
    p.add_argument("--lags", type=int, default=4)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--lambda1", type=float, default=0.1)
    p.add_argument("--lambda2", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--solver-steps", type=int, default=4)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dense", action="store_true",
                   help="allow attention between all pairs; the prior only "
                        "acts through the lambda1 penalty")
    p.add_argument("--options", type=str, default=None,
                   help="inline JSON for the remaining training options "
                        "(learning_rate, momentum, clip_norm, ...)")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_infer)


def _cmd_infer(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.data)
    prior = None
    if args.prior != "auto-gc":
        prior = PriorGraph(WeightedDigraph.loads(Path(args.prior).read_text()))
    extra = json.loads(args.options) if args.options else {}
    config = TrainConfig(lags=args.lags, hidden=args.hidden,
                         lambda1=args.lambda1, lambda2=args.lambda2,
                         epochs=args.epochs, solver_steps=args.solver_steps,
                         dense_support=args.dense, seed=args.seed, **extra)
    model = train(dataset, prior=prior, config=config)
    dynamic, static = extract_graphs(model, args.threshold)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "static_graph.json").write_text(static.dumps())
    (out / "dynamic_graph.json").write_text(dynamic.dumps())
    save_model(model, out / "model.json")

    times = [float(t) for t in dataset.series[0].times]
    preds = predict(model, dataset, times)
    names = dataset.series[0].vertex_names
    with open(out / "trajectories.csv", "w") as fh:
        fh.write("series,time," + ",".join(names) + "\n")
        for k, rows in enumerate(preds):
            for t, row in zip(times, rows):
                fh.write(f"{k},{format_float(t)},"
                         + ",".join(format_float(v) for v in row) + "\n")

    report: dict[str, Any] = {
        "final_loss": model.loss_history[-1],
        "loss_history": list(model.loss_history),
        "hysteresis_index": hysteresis_index(model),
        "threshold": args.threshold,
        "static_edges": sorted(static.edge_set()),
        "config": {
            "lags": config.lags, "hidden": config.hidden,
            "lambda1": config.lambda1, "lambda2": config.lambda2,
            "epochs": config.epochs, "solver_steps": config.solver_steps,
            "dense_support": config.dense_support, "seed": config.seed,
        },
    }
    if dataset.ground_truth is not None:
        report["ged_vs_ground_truth"] = bench_mod.evaluate_graph(
            static, dataset.ground_truth)["ged"]
    (out / "report.json").write_text(canonical_json(report, indent=2) + "\n")
    print(f"final loss {model.loss_history[-1]:.6g}; "
          f"{len(static.edges)} static edges; outputs in {out}")
    return 0


def _add_baseline(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("baseline", help="run one classical inference method")
    p.add_argument("--method", required=True,
                   choices=["gc", "oce", "pc", "mte", "mmi"])
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--lags", type=int, default=5)
    p.add_argument("--dmax", type=int, default=3)
    p.add_argument("--n-perm", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--options", type=str, default=None,
                   help="inline JSON of method-specific options")
    p.add_argument("--out", type=Path, required=True,
                   help="graph JSON path; a per-edge score CSV is written "
                        "next to it with suffix .csv")
    p.set_defaults(func=_cmd_baseline)


def _cmd_baseline(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.data)
    extra = json.loads(args.options) if args.options else {}
    if args.method == "gc":
        graph = granger_graph(dataset, lags=args.lags, alpha=args.alpha,
                              **extra)
    elif args.method == "pc":
        graph = pc_graph(dataset, alpha=args.alpha,
                         max_condition=args.dmax, **extra)
    else:
        est = EntropyEstimatorConfig(kind=extra.pop("kind", "gaussian"),
                                     jitter=float(extra.pop("jitter", 1e-8)),
                                     k=int(extra.pop("k", 4)))
        sig = SignificanceConfig(n_perm=args.n_perm, alpha=args.alpha,
                                 seed=args.seed)
        fn = {"oce": oce_graph, "mte": mte_graph, "mmi": mmi_graph}
        graph = fn[args.method](dataset, est, sig, **extra)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(graph.dumps())
    scores = args.out.with_suffix(".csv")
    with open(scores, "w") as fh:
        fh.write("src,dst,score\n")
        for s, d, w in sorted(graph.edges):
            fh.write(f"{s},{d},{format_float(w)}\n")
    print(f"{len(graph.edges)} edges -> {args.out} (scores in {scores})")
    return 0


def _add_evaluate(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("evaluate", help="score a predicted graph")
    p.add_argument("--pred", type=Path, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--truth", type=Path,
                       help="ground-truth graph JSON file")
    group.add_argument("--data", type=Path,
                       help="dataset directory holding ground-truth edges")
    p.add_argument("--metric", choices=["ged", "precision", "recall"],
                   default=None, help="print one number instead of full JSON")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=_cmd_evaluate)


def _cmd_evaluate(args: argparse.Namespace) -> int:
    predicted = WeightedDigraph.loads(args.pred.read_text())
    if args.truth is not None:
        truth = WeightedDigraph.loads(args.truth.read_text())
    else:
        dataset = load_dataset(args.data)
        if dataset.ground_truth is None:
            raise ConfigurationError(
                f"dataset {args.data} records no ground-truth edges")
        truth = dataset.ground_truth
    scores = bench_mod.evaluate_graph(predicted, truth)
    if args.metric is not None:
        text = format_float(scores[args.metric])
    else:
        text = canonical_json(scores, indent=2)
    if args.out is not None:
        args.out.write_text(text + "\n")
    print(text)
    return 0


def _add_bench(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("bench", help="run the benchmark grid")
    p.add_argument("--config", type=Path, default=None,
                   help="INI file with [systems], [methods], [report]")
    p.add_argument("--out", type=Path, default=None,
                   help="output directory (overrides the config)")
    p.add_argument("--ablation", action="store_true",
                   help="additionally run the model without perturbed "
                        "replicates and report both arms")
    p.add_argument("--large", action="store_true",
                   help="use the wider default grid (all four systems)")
    p.set_defaults(func=_cmd_bench)


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.config is not None:
        config = bench_mod.BenchmarkConfig.from_ini(args.config)
    elif args.large:
        config = bench_mod.large_config()
    else:
        config = bench_mod.BenchmarkConfig()
    if args.out is not None:
        config = bench_mod.BenchmarkConfig(
            config.systems, config.methods, config.seeds, config.threshold,
            config.holdout_fraction, str(args.out))

    report = bench_mod.run_benchmark(config)
    for row in report["summary"]:
        if row["n_ok"]:
            sd = row.get("sd_ged")
            spread = f" +/- {sd:.2f}" if sd is not None else ""
            line = f"{row['mean_ged']:.2f}{spread} ged over {row['n_ok']} seeds"
        else:
            line = "all cells failed"
        print(f"{row['system']:>12} {row['method']:>8}: {line}")

    if args.ablation:
        model_opts = dict(config.methods.get("model", {}))
        ablation = bench_mod.run_ablation(
            seeds=config.seeds, model_options=model_opts,
            threshold=config.threshold, output_dir=config.output_dir)
        print(f"ablation: with {ablation['with_perturbation']['mean_ged']:.2f}"
              f" vs without "
              f"{ablation['without_perturbation']['mean_ged']:.2f} mean ged")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="graphdyn",
        description="dynamic interaction-graph inference from time series")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)
    _add_infer(sub)
    _add_baseline(sub)
    _add_evaluate(sub)
    _add_bench(sub)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
