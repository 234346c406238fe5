"""Directed weighted social graph: data model, I/O, generators, basic queries.

Edge weights are influence probabilities in [0, 1]: ``w[u, v]`` is the chance
that an accepted node ``u`` persuades ``v`` to accept an invitation. Graphs
are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Union

import numpy as np

from .errors import GraphFormatError, GraphParameterError

NodeId = int


@dataclass(frozen=True)
class ZipfWeightConfig:
    """Rank-grid weight model: rank i in 1..rank_count is drawn with
    probability proportional to i**-alpha and maps to weight w_max * i**-alpha
    (rank 1 is always w_max). alpha=0 degenerates to all weights = w_max."""

    alpha: float
    rank_count: int = 10
    w_max: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise GraphParameterError("alpha must be >= 0")
        if self.rank_count < 1:
            raise GraphParameterError("rank_count must be >= 1")
        if not 0.0 < self.w_max <= 1.0:
            raise GraphParameterError("w_max must lie in (0, 1]")

    def rank_weights(self) -> np.ndarray:
        ranks = np.arange(1, self.rank_count + 1, dtype=float)
        return self.w_max * ranks ** (-self.alpha)

    def rank_probabilities(self) -> np.ndarray:
        mass = np.arange(1, self.rank_count + 1, dtype=float) ** (-self.alpha)
        return mass / mass.sum()

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        ranks = rng.choice(self.rank_count, size=count, p=self.rank_probabilities())
        return self.rank_weights()[ranks]


@dataclass(frozen=True)
class UniformWeightConfig:
    """Weights drawn uniformly from [low, high]."""

    low: float = 0.05
    high: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.low <= self.high <= 1.0:
            raise GraphParameterError("need 0 < low <= high <= 1")

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.low, self.high, size=count)


WeightConfig = Union[ZipfWeightConfig, UniformWeightConfig]


class SocialGraph:
    """Directed graph with probability-weighted edges.

    No self-loops, no duplicate arcs; every weight in [0, 1]. Node ids are
    arbitrary non-negative integers and are preserved as given.
    """

    __slots__ = ("_weights", "_out", "_in", "_nodes")

    def __init__(self, edges: Iterable[tuple[int, int, float]]):
        weights: dict[tuple[int, int], float] = {}
        out: dict[int, list[tuple[int, float]]] = {}
        inn: dict[int, list[tuple[int, float]]] = {}
        nodes: set[int] = set()
        for u, v, w in edges:
            if u == v:
                raise GraphFormatError(f"self-loop on node {u}")
            if not 0.0 <= w <= 1.0:
                raise GraphFormatError(f"weight {w!r} on edge ({u}, {v}) outside [0, 1]")
            if u < 0 or v < 0:
                raise GraphFormatError(f"negative node id on edge ({u}, {v})")
            if (u, v) in weights:
                raise GraphFormatError(f"duplicate edge ({u}, {v})")
            weights[(u, v)] = w
            out.setdefault(u, []).append((v, w))
            inn.setdefault(v, []).append((u, w))
            nodes.add(u)
            nodes.add(v)
        for adj in (out, inn):
            for lst in adj.values():
                lst.sort()
        self._weights = weights
        self._out = out
        self._in = inn
        self._nodes = frozenset(nodes)

    @property
    def nodes(self) -> frozenset:
        return self._nodes

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._weights)

    def __contains__(self, node: int) -> bool:
        return node in self._nodes

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for (u, v), w in self._weights.items():
            yield u, v, w

    def weight(self, u: int, v: int) -> float:
        return self._weights[(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._weights

    def out_edges(self, u: int) -> list[tuple[int, float]]:
        return self._out.get(u, [])

    def in_edges(self, v: int) -> list[tuple[int, float]]:
        return self._in.get(v, [])

    def out_degree(self, u: int) -> int:
        return len(self._out.get(u, ()))

    def in_degree(self, v: int) -> int:
        return len(self._in.get(v, ()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self._weights == other._weights and self._nodes == other._nodes

    def __repr__(self) -> str:
        return f"SocialGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def load_edge_list(source: Union[str, Path, IO[str]], undirected: bool = False) -> SocialGraph:
    """Parse "u v w" lines into a graph. '#' starts a comment, blank lines are
    skipped. With undirected=True each line is expanded into both arcs
    (the two arcs share the line's weight)."""
    if isinstance(source, (str, Path)):
        stream: IO[str] = open(source, "r", encoding="utf-8")
        close = True
    else:
        stream = source
        close = False
    triples: list[tuple[int, int, float]] = []
    try:
        for lineno, raw in enumerate(stream, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(f"line {lineno}: expected 'u v w', got {raw.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: could not parse {raw.strip()!r}") from None
            if math.isnan(w):
                raise GraphFormatError(f"line {lineno}: weight is NaN")
            triples.append((u, v, w))
            if undirected and u != v:
                triples.append((v, u, w))
    finally:
        if close:
            stream.close()
    try:
        return SocialGraph(triples)
    except GraphFormatError as exc:
        raise GraphFormatError(str(exc)) from None


def dump_edge_list(graph: SocialGraph, target: Optional[Union[str, Path, IO[str]]] = None) -> str:
    """Serialize to the edge-list text format. Weights use repr so a reload
    reproduces the graph exactly."""
    lines = [f"{u} {v} {w!r}" for u, v, w in sorted(graph.edges())]
    text = "\n".join(lines) + ("\n" if lines else "")
    if target is None:
        return text
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)
    return text


def loads_edge_list(text: str, undirected: bool = False) -> SocialGraph:
    return load_edge_list(io.StringIO(text), undirected=undirected)


def hop_distance(graph: SocialGraph, a: int, b: int) -> Optional[int]:
    """Directed BFS distance from a to b in edge count; None if unreachable."""
    if a not in graph or b not in graph:
        raise GraphParameterError(f"node {a if a not in graph else b} not in graph")
    if a == b:
        return 0
    seen = {a}
    frontier = deque([(a, 0)])
    while frontier:
        node, dist = frontier.popleft()
        for nxt, _ in graph.out_edges(node):
            if nxt == b:
                return dist + 1
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, dist + 1))
    return None


def generate_synthetic(n_nodes: int, avg_out_degree: float, weights: WeightConfig) -> SocialGraph:
    """Weakly connected random directed graph with the requested mean
    out-degree and weights drawn from the given model. Deterministic for a
    fixed config seed."""
    if n_nodes < 2:
        raise GraphParameterError("n_nodes must be >= 2")
    if avg_out_degree < 1:
        raise GraphParameterError("avg_out_degree must be >= 1")
    target_edges = int(round(n_nodes * avg_out_degree))
    max_edges = n_nodes * (n_nodes - 1)
    target_edges = min(target_edges, max_edges)
    rng = np.random.default_rng(weights.seed)

    pairs: set[tuple[int, int]] = set()
    # random spanning structure first, so the graph is weakly connected
    attach = rng.integers(0, np.arange(1, n_nodes))
    flips = rng.random(n_nodes - 1) < 0.5
    for v in range(1, n_nodes):
        u = int(attach[v - 1])
        pairs.add((v, u) if flips[v - 1] else (u, v))
    while len(pairs) < target_edges:
        need = target_edges - len(pairs)
        us = rng.integers(0, n_nodes, size=2 * need + 8)
        vs = rng.integers(0, n_nodes, size=2 * need + 8)
        for u, v in zip(us, vs):
            if u != v and (u, v) not in pairs:
                pairs.add((int(u), int(v)))
                if len(pairs) >= target_edges:
                    break

    ordered = sorted(pairs)
    ws = weights.sample(len(ordered), rng)
    return SocialGraph((u, v, float(w)) for (u, v), w in zip(ordered, ws))


def generate_tree_graph(
    n_nodes: int,
    chain_bias: float = 0.9,
    weights: Optional[WeightConfig] = None,
    seed: int = 0,
) -> SocialGraph:
    """Random arborescence pointing toward node 0.

    Each new node attaches to the previous node with probability chain_bias
    (long influence chains), otherwise to a uniformly random earlier node.
    Leaves of the result act as the seed/friend frontier in benchmarks.
    """
    if n_nodes < 2:
        raise GraphParameterError("n_nodes must be >= 2")
    if not 0.0 <= chain_bias <= 1.0:
        raise GraphParameterError("chain_bias must lie in [0, 1]")
    if weights is None:
        weights = UniformWeightConfig(0.3, 0.9, seed=seed)
    rng = np.random.default_rng(seed)
    parents = np.empty(n_nodes, dtype=np.int64)
    parents[0] = -1
    chain = rng.random(n_nodes) < chain_bias
    uniform_pick = rng.random(n_nodes)
    for v in range(1, n_nodes):
        parents[v] = v - 1 if chain[v] else int(uniform_pick[v] * v)
    ws = weights.sample(n_nodes - 1, rng)
    return SocialGraph(
        (v, int(parents[v]), float(ws[v - 1])) for v in range(1, n_nodes)
    )
