"""Acceptance-probability evaluators and verification oracles.

The analytic evaluators run bottom-up over an influence tree. Two oracles
check them from independent directions: a seeded Monte-Carlo simulation of
the per-edge coin semantics, and an exact enumeration of live-edge worlds on
tiny general graphs. The non-submodularity fixture lives here too.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import AbstractSet, Optional

import numpy as np

from .arborescence import Arborescence, SCopy, TreeNode
from .errors import FriendPlanError, InstanceTooLargeError
from .graph import SocialGraph


@dataclass(frozen=True)
class ProbabilityReport:
    """Per-node acceptance probabilities plus the root objective."""

    ap: dict
    objective: float


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    trials: int


def acceptance_probability(
    tree: Arborescence,
    friends: AbstractSet[int],
    selected: AbstractSet[int],
) -> ProbabilityReport:
    """Probability each node accepts when invitations go only to `selected`.

    Friends (and similarity copies) accept with probability 1; a node outside
    the selection never accepts; otherwise acceptance is one minus the chance
    that every child fails to convert it.
    """
    ap: dict[TreeNode, float] = {}
    children = tree.children
    parent = tree.parent
    for v in tree.topo_order:
        if isinstance(v, SCopy) or v in friends:
            ap[v] = 1.0
            continue
        kids = children[v]
        if v not in selected or not kids:
            ap[v] = 0.0
            continue
        q = 1.0
        for u in kids:
            q *= 1.0 - ap[u] * parent[u][1]
        ap[v] = 1.0 - q
    return ProbabilityReport(ap=ap, objective=ap[tree.root])


def activation_probability(tree: Arborescence, friends: AbstractSet[int]) -> ProbabilityReport:
    """Acceptance when every tree node is invited (no selection filter)."""
    every = {v for v in tree.topo_order if not isinstance(v, SCopy) and v not in friends}
    return acceptance_probability(tree, friends, every)


def mc_estimate(
    tree: Arborescence,
    friends: AbstractSet[int],
    selected: AbstractSet[int],
    trials: int,
    seed: int = 0,
) -> McEstimate:
    """Monte-Carlo estimate of the root acceptance probability.

    Each trial flips an independent coin of bias w per tree edge; a selected
    node accepts as soon as one accepting child's coin succeeds. Returns the
    accepting fraction with its binomial standard error. Deterministic for a
    fixed seed.
    """
    if trials < 1:
        raise FriendPlanError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    acc: dict[TreeNode, np.ndarray] = {}
    ones = np.ones(trials, dtype=bool)
    zeros = np.zeros(trials, dtype=bool)
    for v in tree.topo_order:
        if isinstance(v, SCopy) or v in friends:
            acc[v] = ones
            continue
        if v not in selected:
            acc[v] = zeros
            continue
        state = np.zeros(trials, dtype=bool)
        for u in tree.children[v]:
            child = acc[u]
            if not child.any():
                continue
            w = tree.parent[u][1]
            state |= child & (rng.random(trials) < w)
        acc[v] = state
    hits = int(acc[tree.root].sum())
    p = hits / trials
    return McEstimate(estimate=p, stderr=math.sqrt(p * (1.0 - p) / trials), trials=trials)


def dag_acceptance(
    graph: SocialGraph,
    friends: AbstractSet[int],
    selected: AbstractSet[int],
    target: int,
) -> float:
    """Bottom-up acceptance recursion applied to an acyclic directed graph.

    Treats the incoming influences of a node as independent, which is exact
    on trees and an approximation whenever paths share ancestors.
    """
    order = _topological_order(graph)
    ap: dict[int, float] = {}
    for v in order:
        if v in friends:
            ap[v] = 1.0
            continue
        in_edges = graph.in_edges(v)
        if v not in selected or not in_edges:
            ap[v] = 0.0
            continue
        q = 1.0
        for u, w in in_edges:
            q *= 1.0 - ap[u] * w
        ap[v] = 1.0 - q
    if target not in ap:
        raise FriendPlanError(f"target {target} not in graph")
    return ap[target]


def _topological_order(graph: SocialGraph) -> list[int]:
    indeg = {v: graph.in_degree(v) for v in graph.nodes}
    ready = deque(sorted(v for v, k in indeg.items() if k == 0))
    order = []
    while ready:
        v = ready.popleft()
        order.append(v)
        for u, _ in graph.out_edges(v):
            indeg[u] -= 1
            if indeg[u] == 0:
                ready.append(u)
    if len(order) != len(indeg):
        raise FriendPlanError("graph has a directed cycle")
    return order


def exact_ic_acceptance(
    graph: SocialGraph,
    friends: AbstractSet[int],
    selected: AbstractSet[int],
    target: int,
    max_edges: int = 20,
) -> float:
    """Exact acceptance probability by enumerating live-edge worlds.

    Every edge between invited-or-friend nodes is independently live with its
    weight; the target accepts in a world that contains a live path from some
    friend through selected nodes to it. Cost is exponential in the induced
    edge count, hence the guard.
    """
    if target in friends:
        return 1.0
    if target not in selected:
        return 0.0
    allowed = set(friends) | set(selected)
    induced = [(u, v, w) for u, v, w in sorted(graph.edges())
               if u in allowed and v in allowed]
    if len(induced) > max_edges:
        raise InstanceTooLargeError(
            f"{len(induced)} induced edges exceed the enumeration guard of {max_edges}"
        )
    # Only edges that can ever fire matter: the head must be a selected
    # non-friend (friends accept unconditionally).
    edges = [(u, v, w) for u, v, w in induced if v in selected and v not in friends]
    n = len(edges)
    accepted0 = frozenset(f for f in friends if f in allowed)

    live_adj: dict[int, list[int]] = defaultdict(list)

    def optimistic_reach(accepted: frozenset, i: int) -> bool:
        adj = defaultdict(list)
        for u, lst in live_adj.items():
            adj[u].extend(lst)
        for u, v, _ in edges[i:]:
            adj[u].append(v)
        seen = set(accepted)
        queue = deque(accepted)
        while queue:
            x = queue.popleft()
            if x == target:
                return True
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return target in seen

    def propagate(accepted: frozenset, start: int) -> frozenset:
        grown = set(accepted)
        grown.add(start)
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in live_adj[x]:
                if y not in grown:
                    grown.add(y)
                    queue.append(y)
        return frozenset(grown)

    def solve(i: int, accepted: frozenset) -> float:
        if target in accepted:
            return 1.0
        if i == n or not optimistic_reach(accepted, i):
            return 0.0
        u, v, w = edges[i]
        total = 0.0
        if w < 1.0:
            total += (1.0 - w) * solve(i + 1, accepted)
        if w > 0.0:
            live_adj[u].append(v)
            nxt = propagate(accepted, v) if u in accepted and v not in accepted else accepted
            total += w * solve(i + 1, nxt)
            live_adj[u].pop()
        return total

    return solve(0, accepted0)


@dataclass(frozen=True)
class CounterexampleReport:
    """Marginal gains showing the objective is not submodular.

    Adding the same node to a smaller selection yields a *smaller* gain than
    adding it to a superset, which a submodular objective forbids.
    """

    graph: SocialGraph
    friends: frozenset
    target: int
    added_node: int
    small_set: frozenset
    large_set: frozenset
    ap_small: float
    ap_small_added: float
    ap_large: float
    ap_large_added: float

    @property
    def gain_small(self) -> float:
        return self.ap_small_added - self.ap_small

    @property
    def gain_large(self) -> float:
        return self.ap_large_added - self.ap_large

    @property
    def violated(self) -> bool:
        return self.gain_small < self.gain_large


def submodularity_counterexample() -> CounterexampleReport:
    """Four-node fixture on which selection gains grow with the base set.

    Nodes: friend a=0, intermediaries b=1 and c=2, target t=3. All influence
    toward t flows through b, so {t} and {c, t} yield nothing, while adding c
    on top of {b, t} multiplies the objective tenfold.
    """
    graph = SocialGraph([(0, 1, 0.9), (1, 3, 0.1), (1, 2, 1.0), (2, 3, 1.0)])
    friends = frozenset({0})
    target = 3
    small = frozenset({3})
    large = frozenset({1, 3})
    added = 2
    return CounterexampleReport(
        graph=graph,
        friends=friends,
        target=target,
        added_node=added,
        small_set=small,
        large_set=large,
        ap_small=dag_acceptance(graph, friends, small, target),
        ap_small_added=dag_acceptance(graph, friends, small | {added}, target),
        ap_large=dag_acceptance(graph, friends, large, target),
        ap_large_added=dag_acceptance(graph, friends, large | {added}, target),
    )
