"""Invitation planners over an influence tree.

Three ways to choose which nodes to invite within a budget:

* plan_rg      -- range-limited greedy baseline; fast, not optimal.
* plan_sita    -- exact search that enumerates every split of the budget
                  across child subtrees; exponential, verification only.
* plan_sitina  -- exact dynamic program that folds children in one at a
                  time, O(n * budget^2); the production planner.

Both exact planners fill per-node tables f[v][r] = best acceptance
probability of v when exactly r invitations go into v's subtree (one of
them to v itself), and record their choices for backtracking. plan_sitina
has two engines that produce bit-identical tables: a pure-Python reference
and a JIT-compiled kernel for large trees.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import _fast
from .arborescence import Arborescence, SCopy, TreeNode
from .errors import FriendPlanError, InstanceTooLargeError, TargetInFriendSetError
from .evaluate import acceptance_probability

SITA_STATE_GUARD = 10_000_000
JIT_NODE_THRESHOLD = 512


@dataclass(frozen=True)
class PlanRequest:
    """One planning problem: who invites whom, with how many invitations."""

    initiator: int
    target: int
    friends: frozenset
    budget: int
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "friends", frozenset(self.friends) | {self.initiator})
        if self.target in self.friends:
            raise TargetInFriendSetError(f"target {self.target} is already a friend")
        if self.budget < 1:
            raise FriendPlanError("budget must be >= 1")
        if self.theta < 0:
            raise FriendPlanError("theta must be >= 0")


@dataclass(frozen=True)
class InvitationPlan:
    selected: frozenset
    objective: float
    per_node_budget: dict
    algorithm: str


class _FlatTree:
    """Topologically ordered array view of a tree for the JIT kernel."""

    __slots__ = ("friends_key", "index", "order", "child_start", "child_node",
                 "child_weight", "is_friend", "z")

    def __init__(self, tree: Arborescence, friends: frozenset):
        order = tree.topo_order
        index = {v: i for i, v in enumerate(order)}
        n = len(order)
        child_start = np.zeros(n + 1, dtype=np.int64)
        n_edges = sum(len(tree.children[v]) for v in order)
        child_node = np.zeros(n_edges, dtype=np.int64)
        child_weight = np.zeros(n_edges, dtype=np.float64)
        is_friend = np.zeros(n, dtype=np.bool_)
        z = np.zeros(n, dtype=np.int64)
        e = 0
        for i, v in enumerate(order):
            is_friend[i] = isinstance(v, SCopy) or v in friends
            z[i] = tree.z[v]
            for u in tree.children[v]:
                child_node[e] = index[u]
                child_weight[e] = tree.parent[u][1]
                e += 1
            child_start[i + 1] = e
        self.friends_key = friends
        self.index = index
        self.order = order
        self.child_start = child_start
        self.child_node = child_node
        self.child_weight = child_weight
        self.is_friend = is_friend
        self.z = z


def _flat_tree(tree: Arborescence, friends: frozenset) -> _FlatTree:
    cached = getattr(tree, "_flat_cache", None)
    if cached is not None and cached.friends_key == friends:
        return cached
    flat = _FlatTree(tree, friends)
    tree._flat_cache = flat
    return flat


class DpTables:
    """Planner tables: f[v][r] values plus the recorded split choices.

    The reference engine stores per-node lists (including the child-prefix
    rows m[v][k][x] with winning splits pi[v][k][x]); the JIT engine keeps
    flat arrays and materializes the f mapping only on demand. m is only
    available from the reference engine.
    """

    def __init__(self, budget: int, f: Optional[dict] = None, m: Optional[dict] = None,
                 pi: Optional[dict] = None, alloc: Optional[dict] = None,
                 flat: Optional[tuple] = None):
        self.budget = budget
        self.m = m
        self.pi = pi
        self.alloc = alloc
        self._f = f
        self._flat = flat  # (_FlatTree, f array, pi array)

    @property
    def f(self) -> dict:
        if self._f is None:
            flat, f_arr, _ = self._flat
            stride = self.budget + 1
            self._f = {
                v: [f_arr[i * stride + r] for r in range(min(flat.z[i], self.budget) + 1)]
                for i, v in enumerate(flat.order)
            }
        return self._f

    def f_value(self, v: TreeNode, r: int) -> float:
        if self._flat is not None:
            flat, f_arr, _ = self._flat
            i = flat.index[v]
            if r > min(flat.z[i], self.budget):
                raise IndexError(f"no f entry for node {v} at r={r}")
            return float(f_arr[i * (self.budget + 1) + r])
        values = self._f[v]
        if r >= len(values):
            raise IndexError(f"no f entry for node {v} at r={r}")
        return values[r]

    def child_allocation(self, tree: Arborescence, v: TreeNode, r: int) -> list[tuple[TreeNode, int]]:
        """How the r-1 non-local invitations at v split across its children."""
        kids = tree.children[v]
        if self.alloc is not None:
            return list(zip(kids, self.alloc[(v, r)]))
        x = r - 1
        out = []
        if self._flat is not None:
            flat, _, pi_arr = self._flat
            i = flat.index[v]
            cs = flat.child_start[i]
            for k in range(len(kids), 0, -1):
                xp = int(pi_arr[(cs + k - 1) * self.budget + x])
                out.append((kids[k - 1], xp))
                x -= xp
        else:
            rows = self.pi[v]
            for k in range(len(kids), 0, -1):
                xp = rows[k - 1][x]
                out.append((kids[k - 1], xp))
                x -= xp
        if x != 0:
            raise FriendPlanError(f"inconsistent DP tables at node {v}")
        out.reverse()
        return out


def argmax_first(pairs: Iterable[tuple[float, object]]) -> tuple[float, object]:
    """Largest value wins; on ties the earliest element is kept."""
    best_val = None
    best_payload = None
    for val, payload in pairs:
        if best_val is None or val > best_val:
            best_val, best_payload = val, payload
    if best_val is None:
        raise FriendPlanError("argmax over empty candidate set")
    return best_val, best_payload


def enumerate_allocations(caps: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    """All tuples (r_1..r_k) with sum == total and 0 <= r_i <= caps[i],
    in ascending lexicographic order."""
    n = len(caps)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + caps[i]
    prefix: list[int] = []

    def rec(i: int, remaining: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            if remaining == 0:
                yield tuple(prefix)
            return
        lo = max(0, remaining - suffix[i + 1])
        hi = min(caps[i], remaining)
        for c in range(lo, hi + 1):
            prefix.append(c)
            yield from rec(i + 1, remaining - c)
            prefix.pop()

    return rec(0, total)


def _is_friend(v: TreeNode, friends: AbstractSet[int]) -> bool:
    return isinstance(v, SCopy) or v in friends


def _sitina_tables_python(tree: Arborescence, request: PlanRequest) -> DpTables:
    budget = request.budget
    friends = request.friends
    f: dict[TreeNode, list[float]] = {}
    m_store: dict[TreeNode, list[array]] = {}
    pi_store: dict[TreeNode, list[array]] = {}
    children = tree.children
    parent = tree.parent
    z = tree.z

    for v in tree.topo_order:
        cap_v = min(z[v], budget)
        if _is_friend(v, friends):
            f[v] = [1.0] * (cap_v + 1)
            continue
        kids = children[v]
        if not kids:
            f[v] = [0.0] * (cap_v + 1)
            continue
        q_prev = [1.0]
        prefix = 0
        pi_rows: list[array] = []
        m_rows: list[array] = []
        for u in kids:
            w = parent[u][1]
            fu = f[u]
            cap_u = len(fu) - 1
            if cap_u > budget - 1:
                cap_u = budget - 1
            g = [1.0 - fu[xp] * w for xp in range(cap_u + 1)]
            new_prefix = min(prefix + cap_u, budget - 1)
            q_new = [0.0] * (new_prefix + 1)
            pi_row = [0] * (new_prefix + 1)
            for x in range(new_prefix + 1):
                hi = cap_u if cap_u < x else x
                best_q = 2.0
                best_xp = 0
                # scan every split of the recurrence; the remainder must fit
                # the capacity of the children folded in so far
                for xp in range(hi + 1):
                    if x - xp > prefix:
                        continue
                    cand = q_prev[x - xp] * g[xp]
                    if cand < best_q:
                        best_q = cand
                        best_xp = xp
                q_new[x] = best_q
                pi_row[x] = best_xp
            pi_rows.append(array("i", pi_row))
            m_rows.append(array("d", [1.0 - qq for qq in q_new]))
            q_prev = q_new
            prefix = new_prefix
        f[v] = [0.0] + [1.0 - qq for qq in q_prev]
        pi_store[v] = pi_rows
        m_store[v] = m_rows

    return DpTables(budget=budget, f=f, m=m_store, pi=pi_store)


def _sitina_tables_jit(tree: Arborescence, request: PlanRequest) -> DpTables:
    flat = _flat_tree(tree, request.friends)
    f_arr, pi_arr = _fast.sitina_flat(
        flat.child_start, flat.child_node, flat.child_weight,
        flat.is_friend, flat.z, request.budget,
    )
    return DpTables(budget=request.budget, flat=(flat, f_arr, pi_arr))


def plan_sitina(
    tree: Arborescence,
    request: PlanRequest,
    engine: str = "auto",
) -> tuple[InvitationPlan, DpTables]:
    """Optimal plan by in-node aggregation.

    Per node, children are folded in one at a time: m[k][x] is the best
    probability from sending x invitations into the first k child subtrees,
    and each step scans the budget split x' given to child k. Ties prefer
    the smaller x'. Complement products are carried internally, so the
    objective matches the acceptance evaluator bit for bit.

    engine: "python" (reference), "jit" (compiled kernel), or "auto" to use
    the kernel on trees with at least a few hundred nodes.
    """
    if engine not in ("auto", "python", "jit"):
        raise FriendPlanError(f"unknown engine {engine!r}")
    if engine == "jit" and not _fast.HAVE_NUMBA:
        raise FriendPlanError("the jit engine needs numba installed")
    use_jit = _fast.HAVE_NUMBA and (
        engine == "jit" or (engine == "auto" and tree.n_nodes >= JIT_NODE_THRESHOLD)
    )
    tables = _sitina_tables_jit(tree, request) if use_jit else _sitina_tables_python(tree, request)
    budgets = _selection_budgets(tables, tree, request)
    objective = tables.f_value(tree.root, min(request.budget, tree.z[tree.root]))
    plan = InvitationPlan(
        selected=frozenset(budgets),
        objective=objective,
        per_node_budget=budgets,
        algorithm="sitina",
    )
    return plan, tables


def plan_sita(tree: Arborescence, request: PlanRequest) -> tuple[InvitationPlan, DpTables]:
    """Optimal plan by brute-force budget splits at every node.

    For each node and budget it enumerates every way of distributing the
    remaining invitations across child subtrees and keeps the best. The
    state count is checked up front; oversized instances are refused since
    this planner exists only to verify the aggregating one.
    """
    budget = request.budget
    friends = request.friends
    states = 0
    for v in tree.topo_order:
        if not _is_friend(v, friends) and tree.children[v]:
            states += (budget + 1) ** tree.d[v]
            if states > SITA_STATE_GUARD:
                raise InstanceTooLargeError(
                    f"allocation state count exceeds {SITA_STATE_GUARD}; "
                    "use the in-node aggregation planner for instances this large"
                )

    f: dict[TreeNode, list[float]] = {}
    alloc: dict[tuple[TreeNode, int], tuple[int, ...]] = {}
    for v in tree.topo_order:
        cap_v = min(tree.z[v], budget)
        if _is_friend(v, friends):
            f[v] = [1.0] * (cap_v + 1)
            continue
        kids = tree.children[v]
        if not kids:
            f[v] = [0.0] * (cap_v + 1)
            continue
        fs = [f[u] for u in kids]
        ws = [tree.parent[u][1] for u in kids]
        caps = [len(fu) - 1 for fu in fs]
        values = [0.0]
        for r in range(1, cap_v + 1):

            def candidates(total=r - 1):
                for combo in enumerate_allocations(caps, total):
                    q = 1.0
                    for fu, w, ri in zip(fs, ws, combo):
                        q *= 1.0 - fu[ri] * w
                    yield 1.0 - q, combo

            best_val, best_combo = argmax_first(candidates())
            values.append(best_val)
            alloc[(v, r)] = best_combo
        f[v] = values

    tables = DpTables(budget=budget, f=f, alloc=alloc)
    budgets = _selection_budgets(tables, tree, request)
    objective = f[tree.root][min(budget, tree.z[tree.root])]
    plan = InvitationPlan(
        selected=frozenset(budgets),
        objective=objective,
        per_node_budget=budgets,
        algorithm="sita",
    )
    return plan, tables


def backtrack(tables: DpTables, tree: Arborescence, request: PlanRequest) -> frozenset:
    """Recover the selected set from planner tables: start at the root with
    the full budget, keep one invitation locally, and follow the recorded
    splits into children that received at least one."""
    return frozenset(_selection_budgets(tables, tree, request))


def _selection_budgets(tables: DpTables, tree: Arborescence, request: PlanRequest) -> dict:
    out: dict[TreeNode, int] = {}
    start = min(request.budget, tree.z[tree.root])
    stack: list[tuple[TreeNode, int]] = [(tree.root, start)]
    while stack:
        v, r = stack.pop()
        if r <= 0:
            continue
        if _is_friend(v, request.friends):
            # a tie in the exhaustive planner may park budget under a friend;
            # friends accept anyway, so those invitations are simply not sent
            continue
        out[v] = r
        if not tree.children[v]:
            continue
        for child, share in tables.child_allocation(tree, v, r):
            if share >= 1:
                stack.append((child, share))
    return out


def plan_rg(tree: Arborescence, request: PlanRequest) -> InvitationPlan:
    """Greedy baseline: repeatedly invite the reachable node most likely to
    accept right now, among nodes close enough to still leave budget for the
    remaining hops to the target (at most budget-|R|-1 hops away). The last
    invitation always goes to the target. Ties prefer the smaller node id."""
    budget = request.budget
    friends = request.friends
    root = tree.root
    children = tree.children
    parent = tree.parent
    depth = tree.depth

    ap: dict[TreeNode, float] = {}
    pool: list[int] = []
    for v in tree.topo_order:
        if _is_friend(v, friends):
            ap[v] = 1.0
        else:
            ap[v] = 0.0
            pool.append(v)

    selected: set[int] = set()

    def score(v: int) -> Optional[float]:
        q = 1.0
        reachable = False
        for u in children[v]:
            if _is_friend(u, friends) or u in selected:
                reachable = True
                q *= 1.0 - ap[u] * parent[u][1]
        return 1.0 - q if reachable else None

    while len(selected) < budget:
        limit = budget - len(selected) - 1
        best_v = None
        best_score = -1.0
        for v in pool:
            if v in selected or depth[v] > limit:
                continue
            s = score(v)
            if s is None:
                continue
            if s > best_score or (s == best_score and best_v is not None and v < best_v):
                best_v, best_score = v, s
        if best_v is None:
            if root not in selected:
                selected.add(root)
            break
        selected.add(best_v)
        ap[best_v] = best_score
        x = best_v
        while x != root:
            x = parent[x][0]
            if x not in selected:
                break
            s = score(x)
            ap[x] = s if s is not None else 0.0

    report = acceptance_probability(tree, friends, selected)
    return InvitationPlan(
        selected=frozenset(selected),
        objective=report.objective,
        per_node_budget=_subtree_budgets(tree, selected),
        algorithm="rg",
    )


def _subtree_budgets(tree: Arborescence, selected: AbstractSet[int]) -> dict:
    counts: dict[TreeNode, int] = {}
    for v in tree.topo_order:
        counts[v] = (1 if v in selected else 0) + sum(counts[u] for u in tree.children[v])
    return {v: counts[v] for v in selected}
