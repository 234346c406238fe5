"""Maximum-influence in-arborescence toward a target node.

Influence between two nodes is approximated by their best path: the one
maximizing the product of edge weights. The union of best paths from every
friend of the initiator to the target forms a tree pointing at the target;
similarity ("homophily") edges from the initiator are grafted on as extra
leaf children. All evaluators and planners operate on this tree.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from math import log
from typing import IO, Optional, TYPE_CHECKING, Union

from .errors import FriendPlanError, GraphParameterError, TargetInFriendSetError, TargetUnreachableError
from .graph import SocialGraph
from .homophily import HomophilyModel

if TYPE_CHECKING:
    from .planners import PlanRequest


@dataclass(frozen=True)
class SCopy:
    """Synthetic leaf standing for the initiator's similarity edge to host."""

    host: int

    def __str__(self) -> str:
        return f"s@{self.host}"


TreeNode = Union[int, SCopy]


def node_sort_key(v: TreeNode) -> tuple[int, int]:
    return (1, v.host) if isinstance(v, SCopy) else (0, v)


def max_influence_tree(graph: SocialGraph, target: int) -> dict[int, tuple[Optional[int], float]]:
    """Best-path next hops toward the target.

    For every node that can reach the target over positive-weight edges,
    returns (next hop on a maximum-product path, that path's probability).
    Runs Dijkstra on -log(weight) over reversed edges; ties between
    equal-probability paths prefer the smaller next-hop id, so the union of
    the per-node paths is always a consistent tree.
    """
    if target not in graph:
        raise GraphParameterError(f"target {target} not in graph")
    dist: dict[int, float] = {target: 0.0}
    next_hop: dict[int, Optional[int]] = {target: None}
    settled: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, target)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        for u, w in graph.in_edges(v):
            if w <= 0.0 or u in settled:
                continue
            nd = d - log(w)
            old = dist.get(u)
            if old is None or nd < old:
                dist[u] = nd
                next_hop[u] = v
                heapq.heappush(heap, (nd, u))
            elif nd == old and v < next_hop[u]:
                next_hop[u] = v

    # report probabilities as true weight products along the hop chains,
    # not exp(-dist), so they match the tree edges exactly
    prob: dict[int, float] = {target: 1.0}
    for v in dist:
        chain = []
        x = v
        while x not in prob:
            chain.append(x)
            x = next_hop[x]
        p = prob[x]
        while chain:
            x = chain.pop()
            p = graph.weight(x, next_hop[x]) * p
            prob[x] = p
    return {v: (next_hop[v], prob[v]) for v in dist}


@dataclass
class Arborescence:
    """Rooted in-tree: every edge points from a child toward the root.

    children lists are ordered (numeric children ascending, similarity copy
    last); topo_order lists children strictly before their parents;
    z[v] counts the non-friend nodes in v's subtree, v included when it is
    not a friend.
    """

    root: int
    theta: float
    parent: dict[TreeNode, tuple[TreeNode, float]]
    children: dict[TreeNode, list[TreeNode]]
    friend_nodes: frozenset
    z: dict[TreeNode, int] = field(repr=False, default_factory=dict)
    d: dict[TreeNode, int] = field(repr=False, default_factory=dict)
    depth: dict[TreeNode, int] = field(repr=False, default_factory=dict)
    topo_order: list = field(repr=False, default_factory=list)
    leaf_set: frozenset = frozenset()
    friend_leaves: frozenset = frozenset()

    @classmethod
    def from_parents(
        cls,
        root: int,
        parent: dict[TreeNode, tuple[TreeNode, float]],
        friends: frozenset,
        theta: float = 0.0,
    ) -> "Arborescence":
        children: dict[TreeNode, list[TreeNode]] = {root: []}
        for v in parent:
            children.setdefault(v, [])
        for v, (p, _) in parent.items():
            if p not in children:
                raise FriendPlanError(f"parent {p} of {v} is not a tree node")
            children[p].append(v)
        for v in children:
            children[v].sort(key=node_sort_key)

        # children-before-parent ordering via iterative post-order walk
        topo: list[TreeNode] = []
        stack: list[tuple[TreeNode, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            stack.append((node, True))
            for child in reversed(children[node]):
                stack.append((child, False))
        if len(topo) != len(children):
            raise FriendPlanError("parent map is not a tree rooted at the root")

        tree = cls(
            root=root,
            theta=theta,
            parent=parent,
            children=children,
            friend_nodes=frozenset(v for v in children if v in friends or isinstance(v, SCopy)),
        )
        tree.d = {v: len(children[v]) for v in children}
        tree.z = subtree_counts(tree, friends)
        depth: dict[TreeNode, int] = {root: 0}
        for v in reversed(topo):
            if v != root:
                depth[v] = depth[parent[v][0]] + 1
        tree.depth = depth
        tree.topo_order = topo
        leaves = frozenset(v for v in children if not children[v])
        tree.leaf_set = leaves
        tree.friend_leaves = frozenset(v for v in leaves if v in tree.friend_nodes)
        return tree

    @property
    def n_nodes(self) -> int:
        return len(self.children)

    def nodes(self) -> list[TreeNode]:
        return list(self.topo_order)

    def is_friend(self, v: TreeNode) -> bool:
        return v in self.friend_nodes

    def weight_to_parent(self, v: TreeNode) -> float:
        return self.parent[v][1]

    def real_nodes(self) -> list[int]:
        return [v for v in self.topo_order if not isinstance(v, SCopy)]

    def nonfriend_nodes(self) -> list[int]:
        return [v for v in self.topo_order
                if not isinstance(v, SCopy) and v not in self.friend_nodes]


def build_miia(
    graph: SocialGraph,
    request: "PlanRequest",
    homophily: Optional[HomophilyModel] = None,
) -> Arborescence:
    """Assemble the influence tree for a planning request.

    Takes the union of best paths (probability >= theta) from each friend to
    the target, then grafts a similarity leaf onto every non-friend node the
    model gives positive probability. Fails if the target is already a friend
    or if no influence at all can reach it.
    """
    target, friends, theta = request.target, request.friends, request.theta
    if target in friends:
        raise TargetInFriendSetError(f"target {target} is already a friend")
    for u in friends:
        if u not in graph:
            raise GraphParameterError(f"friend {u} not in graph")
    if target not in graph:
        raise GraphParameterError(f"target {target} not in graph")

    reach = max_influence_tree(graph, target)
    parent: dict[TreeNode, tuple[TreeNode, float]] = {}
    in_tree: set[TreeNode] = {target}
    for u in sorted(friends):
        info = reach.get(u)
        if info is None:
            continue
        _, p = info
        if p <= 0.0 or p < theta:
            continue
        v = u
        while v not in in_tree:
            hop = reach[v][0]
            parent[v] = (hop, graph.weight(v, hop))
            in_tree.add(v)
            v = hop

    for v in sorted(in_tree):
        if v in friends or homophily is None:
            continue
        h = homophily.probability(v)
        if h > 0.0:
            parent[SCopy(v)] = (v, h)

    tree = Arborescence.from_parents(target, parent, frozenset(friends), theta)
    if not tree.children[target]:
        raise TargetUnreachableError(
            f"no friend path reaches target {target} and no similarity edge applies"
        )
    return tree


def subtree_counts(tree: Arborescence, friends: frozenset) -> dict[TreeNode, int]:
    """Per-node count of non-friend nodes in the subtree (node included when
    it is itself not a friend). Similarity copies never count."""
    z: dict[TreeNode, int] = {}
    order = tree.topo_order or _post_order(tree)
    for v in order:
        own = 0 if (v in friends or isinstance(v, SCopy)) else 1
        z[v] = own + sum(z[u] for u in tree.children[v])
    return z


def _post_order(tree: Arborescence) -> list[TreeNode]:
    topo: list[TreeNode] = []
    stack: list[tuple[TreeNode, bool]] = [(tree.root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        stack.append((node, True))
        for child in reversed(tree.children[node]):
            stack.append((child, False))
    return topo


def dump_arborescence(tree: Arborescence, target: Optional[IO[str]] = None) -> str:
    """Text dump, one node per line: "v parent weight z". The root line reads
    "root ROOT - z"; similarity copies render as s@host."""
    lines = []
    for v in reversed(tree.topo_order):
        if v == tree.root:
            lines.append(f"{v} ROOT - {tree.z[v]}")
        else:
            p, w = tree.parent[v]
            lines.append(f"{v} {p} {w!r} {tree.z[v]}")
    text = "\n".join(lines) + "\n"
    if target is not None:
        target.write(text)
    return text
