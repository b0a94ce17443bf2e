"""Command line entry point: ``gnnlocal <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import engine, local, lowerbound, oracles
from .experiments import (ExperimentConfig, RecordStore, ablation, critical_capacity,
                          emit_results, normalize_phase_plot, parse_config_text, run_grid)
from .graph import SubgraphIndicator, load_dataset, read_graph, save_dataset

ALGORITHMS = ("echo", "degree", "union")


def _jsonable(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, np.generic):
        return x.item()
    return x


def _emit(obj, out: str | None) -> None:
    text = json.dumps(_jsonable(obj), indent=1, sort_keys=True)
    if out:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _config_values(args) -> dict:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(parse_config_text(fh.read()))
    for item in args.set or []:
        key, _, value = item.partition("=")
        values[key.strip()] = value.strip()
    return values


def _out_path(args, name: str) -> str:
    return args.out if getattr(args, "out", None) else os.path.join(args.out_dir, name)


# -- file helpers ----------------------------------------------------------------

def read_id_lines(path: str) -> dict[str, list[list[int]]]:
    """``keyword id id ...`` lines, grouped by keyword."""
    groups: dict[str, list[list[int]]] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.split("#", 1)[0].split()
            if not parts:
                continue
            try:
                groups.setdefault(parts[0], []).append([int(t) for t in parts[1:]])
            except ValueError:
                raise SystemExit(f"{path}:{lineno}: expected integer ids") from None
    return groups


def read_subgraph(path: str, g) -> SubgraphIndicator:
    """``edge <id> <id>`` and optional ``node <id>`` lines."""
    groups = read_id_lines(path)
    index = g.index_of_id()
    edges = [(index[a], index[b]) for a, b in groups.get("edge", [])]
    nodes = [index[v] for line in groups.get("node", []) for v in line] or None
    return SubgraphIndicator.from_edges(g, edges, nodes)


def _algorithm(name: str):
    if name == "echo":
        return local.echo()
    if name == "degree":
        return local.degree_algorithm()
    if name == "union":
        return local.union_reconstruction()
    raise SystemExit(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")


# -- subcommands -----------------------------------------------------------------

def cmd_generate(args) -> None:
    out = args.out or os.path.join(args.out_dir, "dataset")
    if args.family == "cycle":
        parts = [("", args.count, args.seed)]
        if args.test_count:
            parts = [("train", args.count, args.seed), ("test", args.test_count, args.seed + 1)]
        summary = {}
        for sub, count, seed in parts:
            graphs, labels, meta = lowerbound.sample_balanced_cycle_dataset(
                args.p, count, seed, k=args.k, density=args.density)
            lowerbound.write_cycle_dataset(os.path.join(out, sub), graphs, labels, meta)
            meta.pop("secrets")
            summary[sub or "dataset"] = meta
        _emit(summary, None)
        return
    rng = np.random.default_rng(args.seed)
    graphs, labels = [], []
    for _ in range(args.count):
        a, b = (int(x) for x in rng.integers(0, 1 << args.q, size=2))
        pg = lowerbound.build_diameter_family(lowerbound.SecretPair.from_ints(a, b, args.q))
        graphs.append(pg.graph)
        labels.append(int(lowerbound.family_predicate("diameter", {}, pg.graph)))
    save_dataset(out, graphs, labels)
    _emit({"family": "diameter", "q": args.q, "count": args.count, "positives": sum(labels)}, None)


def cmd_verify(args) -> None:
    g = read_graph(args.graph, allow_disconnected=True)
    index = g.index_of_id()
    terminals = (index[args.s], index[args.t]) if args.s is not None and args.t is not None else None
    sub = read_subgraph(args.subgraph, g) if args.subgraph else None
    inst = oracles.ProblemInstance(g, None, terminals, sub, args.k)
    _emit(oracles.solve(args.problem, inst).to_json(), None)


def cmd_verify_family(args) -> None:
    params = {"p": args.p, "k": args.k} if args.family == "cycle" else {"q": args.q or args.limit}
    report = lowerbound.verify_family(args.family, params,
                                      exhaustive_limit=1 << (2 * args.limit),
                                      random_pairs=args.random_pairs, seed=args.seed,
                                      n_jobs=args.jobs)
    _emit(report, args.out)


def cmd_simulate(args) -> None:
    g = read_graph(args.graph)
    alg = _algorithm(args.alg)
    if args.bandwidth is not None:
        t = local.run_congest(g, alg, args.rounds, local.BandwidthBudget(args.bandwidth))
    else:
        t = local.run_local(g, alg, args.rounds)
    out = t.to_json()
    if args.cut:
        groups = read_id_lines(args.cut)
        index = g.index_of_id()
        alice = [index[v] for line in groups.get("alice", []) for v in line]
        per_round, total = local.cut_traffic(t, alice)
        out["cut"] = {"alice": alice, "per_round": per_round, "total": total}
    _emit(out, _out_path(args, "transcript.json"))


def read_network_spec(path: str) -> dict:
    with open(path) as fh:
        return parse_config_text(fh.read())


def cmd_gnn_run(args) -> None:
    g = read_graph(args.graph, allow_disconnected=True)
    spec = read_network_spec(args.network)
    if "trained" in spec:
        from .train.attributes import AttributeScheme, attribute_matrix
        from .train.gin import GinNetwork, forward_train, make_batch
        base = os.path.dirname(os.path.abspath(args.network))
        with open(os.path.join(base, spec["trained"])) as fh:
            run = json.load(fh)
        net = GinNetwork.from_json(run["parameters"])
        scheme = AttributeScheme(run["scheme"], net.in_dim)
        X = attribute_matrix(g, scheme, np.random.default_rng(args.seed))
        logits, _ = forward_train(net, make_batch([g], [X]))
        _emit({"logit": float(logits[0]), "label": int(logits[0] > 0)},
              _out_path(args, "trace.json"))
        return
    kind = spec.get("layers", "sum")
    depth = int(spec.get("depth", 1))
    precision = int(spec["precision"]) if "precision" in spec else None
    if kind == "sum":
        net = engine.GnnNetwork((engine.sum_layer(),) * depth, precision=precision)
    else:
        net = engine.gnn_from_local(_algorithm(kind), depth, g.n, precision)
    trace = engine.forward(net, g)
    out = trace.to_json()
    if kind != "sum":
        out["decoded"] = engine.trace_bits(net, trace)
    if spec.get("readout") == "sum":
        out["readout"] = [sum(col) for col in zip(*trace.terminal())]
    _emit(out, _out_path(args, "trace.json"))


def _load_split(directory: str, seed: int):
    train_dir, test_dir = os.path.join(directory, "train"), os.path.join(directory, "test")
    if os.path.isdir(train_dir) and os.path.isdir(test_dir):
        _, trg, trl = load_dataset(train_dir)
        _, teg, tel = load_dataset(test_dir)
        return trg, trl, teg, tel
    _, graphs, labels = load_dataset(directory)
    order = np.random.default_rng(seed).permutation(len(graphs))
    cut = len(graphs) * 5 // 6
    pick = lambda idx: ([graphs[i] for i in idx], [labels[i] for i in idx])  # noqa: E731
    return (*pick(order[:cut]), *pick(order[cut:]))


def cmd_train(args) -> None:
    from .train.attributes import AttributeScheme
    from .train.trainer import train
    values = _config_values(args)
    values.setdefault("seed", args.seed)
    cfg = ExperimentConfig.from_mapping(values)
    trg, trl, teg, tel = _load_split(args.dataset, cfg.seed)
    scheme = AttributeScheme.for_graphs(args.scheme, trg + teg)
    tc = cfg.train_config()
    results = [train(trg, trl, teg, tel, args.depth, args.width, scheme, tc, restart=r)
               for r in range(args.restarts)]
    best = max(results, key=lambda r: r.best_test_accuracy)
    run = {
        "config": tc.to_json(), "config_hash": tc.digest(), "depth": args.depth,
        "width": args.width, "scheme": args.scheme,
        "restarts": [r.summary() for r in results],
        "curves": [r.curves for r in results],
        "parameters": best.net.to_json() if best.net is not None else None,
    }
    _emit(run, _out_path(args, "run.json"))
    print(json.dumps(best.summary()))


def _experiment_config(args) -> ExperimentConfig:
    values = _config_values(args)
    values.setdefault("seed", args.seed)
    return ExperimentConfig.from_mapping(values)


def cmd_grid(args) -> None:
    cfg = _experiment_config(args)
    store = RecordStore(os.path.join(args.out_dir, "store"))

    def report(rec):
        print(f"{rec.run_id} n={rec.n} d={rec.d} w={rec.w} {rec.scheme} r={rec.restart} "
              f"train={rec.train_acc:.3f} test={rec.test_acc:.3f}"
              + (f" FAILED {rec.error}" if rec.failed else ""), flush=True)

    records = run_grid(cfg, store, n_jobs=args.jobs, progress=report)
    emit_results(records, args.out_dir)
    print(f"{len(records)} records")


def cmd_analyze(args) -> None:
    cfg = _experiment_config(args)
    store = RecordStore(os.path.join(args.out_dir, "store"))
    records = [r for r in store.load().values() if r.scheme in cfg.schemes]
    summary = {}
    sizes = sorted({r.n for r in records})
    critical = {n: critical_capacity(records, n, cfg.threshold) for n in sizes}
    summary["critical_capacity"] = critical
    defined = {n: c for n, c in critical.items() if c is not None}
    rows = normalize_phase_plot([r for r in records if r.n in defined], defined)
    with open(os.path.join(args.out_dir, "phase.csv"), "w") as fh:
        fh.write("n,d,w,x,y,accuracy,subcritical\n")
        for row in rows:
            fh.write("{n},{d},{w},{x:.6f},{y:.6f},{accuracy:.6f},{subcritical}\n".format(**row))
    with open(os.path.join(args.out_dir, "critical.csv"), "w") as fh:
        fh.write("n,critical_capacity\n")
        for n, c in critical.items():
            fh.write(f"{n},{'' if c is None else c}\n")
    if args.ablation:
        p, d, w = (int(x) for x in args.ablation.split(","))
        summary["ablation"] = ablation(cfg, store, p, d, w)
    emit_results(records, args.out_dir)
    _emit(summary, os.path.join(args.out_dir, "analysis.json"))
    _emit(summary, None)


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default="results")
    common.add_argument("--config", help="plain-text key = value file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config value (repeatable)")
    parser = argparse.ArgumentParser(prog="gnnlocal", parents=[common],
                                     description="Message-passing GNNs as distributed algorithms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a lower-bound dataset")
    p.add_argument("--family", choices=("cycle", "diameter"), default="cycle")
    p.add_argument("--p", type=int, default=6)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--test-count", type=int, default=0)
    p.add_argument("--density", type=float, default=0.45)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", parents=[common], help="solve a problem with the exact oracles")
    p.add_argument("--problem", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--subgraph")
    p.add_argument("--k", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--t", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("verify-family", parents=[common], help="sweep secret pairs of a family")
    p.add_argument("--family", choices=("cycle", "diameter"), required=True)
    p.add_argument("--limit", type=int, default=8,
                   help="largest secret length swept exhaustively")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--q", type=int)
    p.add_argument("--random-pairs", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_family)

    p = sub.add_parser("simulate", parents=[common], help="run a node algorithm")
    p.add_argument("--graph", required=True)
    p.add_argument("--alg", required=True, choices=ALGORITHMS)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--bandwidth", type=int)
    p.add_argument("--cut", help="file with 'alice <ids>' lines")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gnn-run", parents=[common], help="run an exact or trained network")
    p.add_argument("--graph", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gnn_run)

    p = sub.add_parser("train", parents=[common], help="train a GIN on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--scheme", default="unique_id_onehot")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", parents=[common], help="train the depth/width grid")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("analyze", parents=[common], help="critical capacity, phase plot, ablation")
    p.add_argument("--ablation", metavar="P,D,W", help="also run the attribute ablation")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
