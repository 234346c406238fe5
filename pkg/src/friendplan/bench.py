"""Sensitivity-sweep harness: vary budget, distance, friend count, or weight
skew over sampled initiator/target pairs, compare planners, and emit CSV.

A sweep point derives its random streams from (seed, value index, pair
index), so results are bit-identical across reruns and independent of how
points are scheduled; only the runtime columns vary. Budget and skew sweeps
reuse the same sampled pairs at every value, which makes per-pair trends
directly comparable.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import mean, pstdev
from typing import IO, Optional, Sequence, Union

import numpy as np

from .arborescence import build_miia
from .errors import FriendPlanError, SamplingError
from .graph import (
    SocialGraph,
    UniformWeightConfig,
    ZipfWeightConfig,
    generate_synthetic,
    generate_tree_graph,
    hop_distance,
    load_edge_list,
)
from .homophily import HomophilyModel
from .planners import PlanRequest, plan_rg, plan_sita, plan_sitina

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("budget", "distance", "friend_count", "alpha")
ALGORITHMS = ("rg", "sita", "sitina")


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a graph source, the variable to vary, and fixed settings.

    graph accepts a file path or a generator string:
      zipf:n=2000,deg=6,alpha=1.0,ranks=10,wmax=0.9
      uniform:n=2000,deg=6,low=0.05,high=0.9
      tree:n=10000,chain=0.92,low=0.3,high=0.9
    """

    graph: str
    sweep: str
    values: tuple
    pairs: int = 20
    seed: int = 0
    algorithms: tuple = ("rg", "sitina")
    budget: int = 10
    distance: Optional[int] = None
    theta: float = 0.0
    homophily: float = 0.0

    def __post_init__(self):
        if self.sweep not in SWEEP_VARIABLES:
            raise FriendPlanError(f"unknown sweep variable {self.sweep!r}")
        if not self.values:
            raise FriendPlanError("sweep needs at least one value")
        if self.pairs < 1:
            raise FriendPlanError("pairs must be >= 1")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise FriendPlanError(f"unknown algorithm {algo!r}")
        if self.sweep == "alpha" and not self.graph.startswith("zipf:"):
            raise FriendPlanError("an alpha sweep needs a zipf: graph source")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentSpec":
        pairs = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FriendPlanError(f"spec line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            pairs[key.strip()] = value.strip()
        return cls.from_mapping(pairs)

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentSpec":
        known = {"graph", "sweep", "values", "pairs", "seed", "algorithms",
                 "budget", "distance", "theta", "homophily"}
        unknown = set(raw) - known
        if unknown:
            raise FriendPlanError(f"unknown spec keys: {sorted(unknown)}")
        try:
            sweep = raw["sweep"]
            graph = raw["graph"]
        except KeyError as exc:
            raise FriendPlanError(f"spec is missing required key {exc}") from None
        number = float if sweep == "alpha" else int
        values = tuple(number(v) for v in raw.get("values", "").replace(",", " ").split())
        kwargs = dict(graph=graph, sweep=sweep, values=values)
        if "pairs" in raw:
            kwargs["pairs"] = int(raw["pairs"])
        if "seed" in raw:
            kwargs["seed"] = int(raw["seed"])
        if "algorithms" in raw:
            kwargs["algorithms"] = tuple(a for a in raw["algorithms"].replace(",", " ").split())
        if "budget" in raw:
            kwargs["budget"] = int(raw["budget"])
        if "distance" in raw and raw["distance"]:
            kwargs["distance"] = int(raw["distance"])
        if "theta" in raw:
            kwargs["theta"] = float(raw["theta"])
        if "homophily" in raw:
            kwargs["homophily"] = float(raw["homophily"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ResultRow:
    sweep_var: str
    sweep_value: float
    algorithm: str
    n_pairs: int
    mean_objective: float
    stddev_objective: float
    mean_runtime_ms: float
    mean_longest_path: float


CSV_COLUMNS = ("sweep_var", "sweep_value", "algorithm", "n_pairs", "mean_objective",
               "stddev_objective", "mean_runtime_ms", "mean_longest_path")

_PLANNERS = {"rg": plan_rg, "sita": plan_sita, "sitina": plan_sitina}


def sample_pair(
    graph: SocialGraph,
    seed,
    distance: Optional[int] = None,
    friend_band: Optional[tuple[int, int]] = None,
    max_tries: int = 10_000,
) -> tuple[int, int, frozenset]:
    """Uniform random (initiator, target, friends) with optional constraints:
    exact hop distance from initiator to target, or friend count within a
    band. Friends are the initiator's out-neighbors plus itself."""
    rng = np.random.default_rng(seed)
    nodes = sorted(graph.nodes)
    for _ in range(max_tries):
        s = nodes[int(rng.integers(len(nodes)))]
        t = nodes[int(rng.integers(len(nodes)))]
        friends = frozenset(v for v, _ in graph.out_edges(s)) | {s}
        if t == s or t in friends:
            continue
        if friend_band is not None:
            lo, hi = friend_band
            if not lo <= len(friends) - 1 <= hi:
                continue
        if distance is not None:
            if hop_distance(graph, s, t) != distance:
                continue
        elif hop_distance(graph, s, t) is None:
            continue
        return s, t, friends
    raise SamplingError(
        f"no pair with distance={distance} friend_band={friend_band} in {max_tries} draws"
    )


def _friend_band(value: int) -> tuple[int, int]:
    return max(1, int(value * 0.8)), int(np.ceil(value * 1.2))


def _point_spec(spec: ExperimentSpec, value) -> tuple[int, Optional[int], Optional[tuple], float]:
    """(budget, distance constraint, friend band, alpha override) at a value."""
    budget, dist, band, alpha = spec.budget, spec.distance, None, None
    if spec.sweep == "budget":
        budget = int(value)
    elif spec.sweep == "distance":
        dist = int(value)
    elif spec.sweep == "friend_count":
        band = _friend_band(int(value))
    elif spec.sweep == "alpha":
        alpha = float(value)
    return budget, dist, band, alpha


def _parse_kv(body: str) -> dict:
    out = {}
    for part in body.split(","):
        if not part:
            continue
        key, _, value = part.partition("=")
        out[key.strip()] = value.strip()
    return out


def resolve_graph(source: str, seed: int, alpha: Optional[float] = None) -> SocialGraph:
    """Build or load the graph a spec names; alpha overrides a zipf source's
    skew (same seed keeps the arc set identical across alphas)."""
    if source.startswith("zipf:"):
        kv = _parse_kv(source[5:])
        cfg = ZipfWeightConfig(
            alpha=alpha if alpha is not None else float(kv.get("alpha", 1.0)),
            rank_count=int(kv.get("ranks", 10)),
            w_max=float(kv.get("wmax", 0.9)),
            seed=seed,
        )
        return generate_synthetic(int(kv["n"]), float(kv.get("deg", 6)), cfg)
    if source.startswith("uniform:"):
        kv = _parse_kv(source[8:])
        cfg = UniformWeightConfig(
            low=float(kv.get("low", 0.05)), high=float(kv.get("high", 0.9)), seed=seed
        )
        return generate_synthetic(int(kv["n"]), float(kv.get("deg", 6)), cfg)
    if source.startswith("tree:"):
        kv = _parse_kv(source[5:])
        weights = UniformWeightConfig(
            low=float(kv.get("low", 0.3)), high=float(kv.get("high", 0.9)), seed=seed
        )
        return generate_tree_graph(
            int(kv["n"]), chain_bias=float(kv.get("chain", 0.9)), weights=weights, seed=seed
        )
    return load_edge_list(source)


def tree_pair(graph: SocialGraph) -> tuple[int, int, frozenset]:
    """For arborescence sources: target is the root, friends are the leaves."""
    leaves = sorted(v for v in graph.nodes if graph.in_degree(v) == 0)
    return leaves[0], 0, frozenset(leaves)


def _run_point(spec: ExperimentSpec, value_index: int) -> list[ResultRow]:
    value = spec.values[value_index]
    budget, dist, band, alpha = _point_spec(spec, value)
    graph = resolve_graph(spec.graph, spec.seed, alpha=alpha)
    homophily = HomophilyModel(constant=spec.homophily) if spec.homophily > 0 else None
    is_tree_source = spec.graph.startswith("tree:")

    # budget/alpha sweeps keep the same pairs at every value so trends are
    # per-pair comparable; distance/friend sweeps resample by necessity
    pair_key = value_index if spec.sweep in ("distance", "friend_count") else 0

    samples: dict[str, list[tuple[float, float, float]]] = {a: [] for a in spec.algorithms}
    done = 0
    failures = 0
    attempt = 0
    max_attempts = spec.pairs * 10
    while done < spec.pairs and attempt < max_attempts:
        pair_seed = np.random.SeedSequence(entropy=spec.seed, spawn_key=(pair_key, attempt))
        attempt += 1
        try:
            if is_tree_source:
                s, t, friends = tree_pair(graph)
            else:
                s, t, friends = sample_pair(graph, pair_seed, distance=dist, friend_band=band)
            request = PlanRequest(initiator=s, target=t, friends=friends,
                                  budget=budget, theta=spec.theta)
            tree = build_miia(graph, request, homophily=homophily)
        except FriendPlanError as exc:
            failures += 1
            log.debug("sample failed at %s=%s: %s", spec.sweep, value, exc)
            continue
        for algo in spec.algorithms:
            planner = _PLANNERS[algo]
            start = time.perf_counter()
            result = planner(tree, request)
            elapsed_ms = (time.perf_counter() - start) * 1e3
            plan = result[0] if isinstance(result, tuple) else result
            longest = max(tree.depth[v] for v in plan.selected) if plan.selected else 0
            samples[algo].append((plan.objective, elapsed_ms, float(longest)))
        done += 1
    if failures:
        log.info("%s=%s: %d samples discarded, %d kept", spec.sweep, value, failures, done)
    if done == 0:
        raise SamplingError(f"no usable pair at {spec.sweep}={value}")

    rows = []
    for algo in spec.algorithms:
        objectives = [x[0] for x in samples[algo]]
        runtimes = [x[1] for x in samples[algo]]
        longest = [x[2] for x in samples[algo]]
        rows.append(ResultRow(
            sweep_var=spec.sweep,
            sweep_value=float(value),
            algorithm=algo,
            n_pairs=done,
            mean_objective=mean(objectives),
            stddev_objective=pstdev(objectives),
            mean_runtime_ms=mean(runtimes),
            mean_longest_path=mean(longest),
        ))
    return rows


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> list[ResultRow]:
    """Run every sweep point and return one row per (value, algorithm).
    threads > 1 distributes sweep points across worker processes; the
    non-timing columns do not depend on the schedule."""
    indexes = range(len(spec.values))
    if threads > 1 and len(spec.values) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_point, [spec] * len(spec.values), indexes))
    else:
        chunks = [_run_point(spec, i) for i in indexes]
    return [row for chunk in chunks for row in chunk]


def write_csv(rows: Sequence[ResultRow], target: Union[str, Path, IO[str]]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as handle:
            _write_csv(rows, handle)
    else:
        _write_csv(rows, target)


def _write_csv(rows: Sequence[ResultRow], handle: IO[str]) -> None:
    writer = csv.writer(handle)
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([getattr(row, col) for col in CSV_COLUMNS])


def tree_scaling_run(
    node_counts: Sequence[int],
    budgets: Sequence[int],
    seed: int = 0,
    chain_bias: float = 0.98,
    repeats: int = 3,
    engine: str = "auto",
) -> list[dict]:
    """Time the aggregation planner on synthetic influence trees.

    Returns one record per (n_nodes, budget) with the planner wall time in
    milliseconds (best of `repeats`, after an untimed warm-up that also
    triggers JIT compilation); tree construction is excluded.
    """
    records = []
    for n in node_counts:
        graph = generate_tree_graph(n, chain_bias=chain_bias, seed=seed)
        s, t, friends = tree_pair(graph)
        base = PlanRequest(initiator=s, target=t, friends=friends, budget=max(budgets))
        tree = build_miia(graph, base)
        plan_sitina(tree, base, engine=engine)  # warm-up
        for budget in budgets:
            request = replace(base, budget=budget)
            best = None
            objective = 0.0
            for _ in range(max(1, repeats)):
                start = time.perf_counter()
                plan, _ = plan_sitina(tree, request, engine=engine)
                elapsed_ms = (time.perf_counter() - start) * 1e3
                objective = plan.objective
                best = elapsed_ms if best is None else min(best, elapsed_ms)
            records.append({
                "n_nodes": n,
                "budget": budget,
                "runtime_ms": best,
                "objective": objective,
            })
    return records


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])
