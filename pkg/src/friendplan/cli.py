"""Command-line interface.

Subcommands: gen (synthetic graphs), miia (influence-tree dump), plan
(invitation planning), eval (acceptance of a given selection), simulate
(Monte-Carlo check), counterexample (non-submodularity report), bench
(sensitivity sweeps). Exit codes: 0 success, 1 usage error, 2 domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .arborescence import Arborescence, build_miia, dump_arborescence
from .bench import ExperimentSpec, run_experiment, write_csv
from .errors import FriendPlanError, TargetInFriendSetError
from .evaluate import acceptance_probability, mc_estimate, submodularity_counterexample
from .graph import (
    SocialGraph,
    UniformWeightConfig,
    ZipfWeightConfig,
    dump_edge_list,
    generate_synthetic,
    generate_tree_graph,
    load_edge_list,
)
from .homophily import HomophilyModel, load_homophily
from .planners import PlanRequest, plan_rg, plan_sita, plan_sitina

USAGE_EXIT = 1
DOMAIN_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _read_ids(path: str) -> list[int]:
    ids = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            ids.append(int(line))
        except ValueError:
            raise FriendPlanError(f"{path} line {lineno}: expected a node id") from None
    return ids


def _homophily_arg(value: Optional[str]) -> Optional[HomophilyModel]:
    if value is None:
        return None
    try:
        constant = float(value)
    except ValueError:
        return load_homophily(value)
    if constant <= 0:
        return None
    return HomophilyModel(constant=constant)


def _request(args) -> PlanRequest:
    friends = set(_read_ids(args.friends)) if args.friends else None
    graph = load_edge_list(args.graph)
    if friends is None:
        friends = {v for v, _ in graph.out_edges(args.source)}
    return graph, PlanRequest(
        initiator=args.source,
        target=args.target,
        friends=frozenset(friends) | {args.source},
        budget=getattr(args, "budget", 1),
        theta=args.theta,
    )


def _add_instance_flags(sub, budget: bool = False):
    sub.add_argument("--graph", required=True, help="edge-list file")
    sub.add_argument("--source", type=int, required=True, help="initiator node id")
    sub.add_argument("--target", type=int, required=True, help="target node id")
    sub.add_argument("--friends", help="file with one friend id per line "
                                       "(default: out-neighbors of the initiator)")
    sub.add_argument("--theta", type=float, default=0.0,
                     help="drop influence paths below this probability (default 0)")
    sub.add_argument("--homophily", help="constant probability or a 'node p' table file")
    if budget:
        sub.add_argument("--budget", type=int, required=True, help="invitation budget")


def build_parser() -> _Parser:
    parser = _Parser(prog="friendplan", description=__doc__)
    parser.add_argument("--version", action="version", version=f"friendplan {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[], help="generate a synthetic graph",
                              description="Write a random weighted graph as an edge list.")
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--avg-degree", type=float, default=6.0)
    gen.add_argument("--weights", choices=["zipf", "uniform"], default="zipf")
    gen.add_argument("--alpha", type=float, default=1.0, help="zipf skewness")
    gen.add_argument("--ranks", type=int, default=10, help="zipf rank grid size")
    gen.add_argument("--w-max", type=float, default=0.9)
    gen.add_argument("--low", type=float, default=0.05, help="uniform weight lower bound")
    gen.add_argument("--high", type=float, default=0.9, help="uniform weight upper bound")
    gen.add_argument("--kind", choices=["graph", "tree"], default="graph",
                     help="tree: random arborescence toward node 0")
    gen.add_argument("--chain-bias", type=float, default=0.9,
                     help="tree kind: probability a node extends the previous chain")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", help="output path (default stdout)")

    miia = commands.add_parser("miia", help="dump the influence tree toward the target")
    _add_instance_flags(miia)
    miia.add_argument("--output", help="output path (default stdout)")

    plan = commands.add_parser("plan", help="compute an invitation plan")
    _add_instance_flags(plan, budget=True)
    plan.add_argument("--algorithm", choices=["rg", "sita", "sitina"], default="sitina")
    plan.add_argument("--output", choices=["table", "json"], default="table",
                      help="output format")

    ev = commands.add_parser("eval", help="acceptance probability of a given selection")
    _add_instance_flags(ev)
    ev.add_argument("--select", required=True, help="file with one selected id per line")
    ev.add_argument("--per-node", action="store_true", help="print the per-node table")

    sim = commands.add_parser("simulate", help="Monte-Carlo check of a selection")
    _add_instance_flags(sim)
    sim.add_argument("--select", required=True, help="file with one selected id per line")
    sim.add_argument("--trials", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=0)

    ce = commands.add_parser("counterexample",
                             help="show that selection gains are not submodular")
    ce.add_argument("--json", action="store_true")

    bench = commands.add_parser("bench", help="run a sensitivity sweep from a spec file")
    bench.add_argument("--spec", required=True, help="key=value spec file")
    bench.add_argument("--output", required=True, help="CSV output path")
    bench.add_argument("--threads", type=int, default=None,
                       help="worker processes for sweep points (default: all cores)")

    return parser


def _cmd_gen(args) -> int:
    if args.weights == "zipf":
        config = ZipfWeightConfig(alpha=args.alpha, rank_count=args.ranks,
                                  w_max=args.w_max, seed=args.seed)
    else:
        config = UniformWeightConfig(low=args.low, high=args.high, seed=args.seed)
    if args.kind == "tree":
        graph = generate_tree_graph(args.nodes, chain_bias=args.chain_bias,
                                    weights=config, seed=args.seed)
    else:
        graph = generate_synthetic(args.nodes, args.avg_degree, config)
    text = dump_edge_list(graph)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_miia(args) -> int:
    graph, request = _request(args)
    tree = build_miia(graph, request, homophily=_homophily_arg(args.homophily))
    text = dump_arborescence(tree)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _plan_json(plan, tree: Arborescence, request: PlanRequest, runtime_ms: float) -> dict:
    report = acceptance_probability(tree, request.friends, plan.selected)
    return {
        "algorithm": plan.algorithm,
        "budget": request.budget,
        "objective": plan.objective,
        "selected": [
            {"node": v, "subtree_budget": plan.per_node_budget[v], "ap": report.ap[v]}
            for v in sorted(plan.selected)
        ],
        "tree_size": tree.n_nodes,
        "runtime_ms": runtime_ms,
    }


def _cmd_plan(args) -> int:
    try:
        graph, request = _request(args)
    except TargetInFriendSetError:
        # nothing to plan; report the trivial result instead of failing
        doc = {"algorithm": args.algorithm, "budget": args.budget, "objective": 1.0,
               "selected": [], "tree_size": 0, "runtime_ms": 0.0,
               "note": "target is already a friend"}
        if args.output == "json":
            json.dump(doc, sys.stdout, indent=2)
            sys.stdout.write("\n")
        else:
            print("target is already a friend; acceptance probability 1")
        return 0
    tree = build_miia(graph, request, homophily=_homophily_arg(args.homophily))
    planner = {"rg": plan_rg, "sita": plan_sita, "sitina": plan_sitina}[args.algorithm]
    start = time.perf_counter()
    result = planner(tree, request)
    runtime_ms = (time.perf_counter() - start) * 1e3
    plan = result[0] if isinstance(result, tuple) else result
    doc = _plan_json(plan, tree, request, runtime_ms)
    if args.output == "json":
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(f"algorithm      {doc['algorithm']}")
        print(f"budget         {doc['budget']}")
        print(f"objective      {doc['objective']:.6g}")
        print(f"tree size      {doc['tree_size']}")
        print(f"runtime        {doc['runtime_ms']:.2f} ms")
        print("node  subtree_budget  acceptance")
        for entry in doc["selected"]:
            print(f"{entry['node']:<5d} {entry['subtree_budget']:>14d}  {entry['ap']:.6g}")
    return 0


def _cmd_eval(args) -> int:
    graph, request = _request(args)
    selected = frozenset(_read_ids(args.select))
    tree = build_miia(graph, request, homophily=_homophily_arg(args.homophily))
    report = acceptance_probability(tree, request.friends, selected)
    print(f"objective {report.objective:.10g}")
    if args.per_node:
        print("node  acceptance")
        for v in sorted(report.ap, key=str):
            print(f"{v!s:<8} {report.ap[v]:.10g}")
    return 0


def _cmd_simulate(args) -> int:
    graph, request = _request(args)
    selected = frozenset(_read_ids(args.select))
    tree = build_miia(graph, request, homophily=_homophily_arg(args.homophily))
    est = mc_estimate(tree, request.friends, selected, trials=args.trials, seed=args.seed)
    print(f"estimate {est.estimate:.6g} +- {est.stderr:.3g} ({est.trials} trials)")
    return 0


def _cmd_counterexample(args) -> int:
    report = submodularity_counterexample()
    if args.json:
        json.dump({
            "ap_small": report.ap_small,
            "ap_small_added": report.ap_small_added,
            "ap_large": report.ap_large,
            "ap_large_added": report.ap_large_added,
            "gain_small": report.gain_small,
            "gain_large": report.gain_large,
            "violated": report.violated,
        }, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0
    small = sorted(report.small_set)
    large = sorted(report.large_set)
    print(f"ap({small})            = {report.ap_small:.6g}")
    print(f"ap({small} + [{report.added_node}])      = {report.ap_small_added:.6g}")
    print(f"ap({large})         = {report.ap_large:.6g}")
    print(f"ap({large} + [{report.added_node}])   = {report.ap_large_added:.6g}")
    print(f"gain at smaller set = {report.gain_small:.6g}")
    print(f"gain at larger set  = {report.gain_large:.6g}")
    print(f"non-submodular: {report.gain_small:.6g} < {report.gain_large:.6g}")
    return 0


def _cmd_bench(args) -> int:
    import os

    spec = ExperimentSpec.from_file(args.spec)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    rows = run_experiment(spec, threads=threads)
    write_csv(rows, args.output)
    print(f"wrote {len(rows)} rows to {args.output}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "miia": _cmd_miia,
    "plan": _cmd_plan,
    "eval": _cmd_eval,
    "simulate": _cmd_simulate,
    "counterexample": _cmd_counterexample,
    "bench": _cmd_bench,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FriendPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_EXIT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_EXIT


if __name__ == "__main__":
    sys.exit(main())
