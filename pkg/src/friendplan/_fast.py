"""JIT-compiled inner loop for the aggregation planner.

The kernel mirrors the pure-Python dynamic program over a flattened tree
(children listed before parents, CSR child arrays) and must produce
bit-identical tables: same operations, same order, no fast-math.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def sitina_flat(child_start, child_node, child_weight, is_friend, z, budget):
    """Fill f and split-choice tables for every node of a flattened tree.

    f is strided by budget+1 per node: f[i*(budget+1) + r] is the best
    acceptance probability of node i with exactly r invitations in its
    subtree. pi is strided by budget per child slot e: pi[e*budget + x] is
    the winning share for that child when x invitations go into the child
    prefix ending at e. Complement products are carried throughout, so
    results match the reference implementation bit for bit.
    """
    n = is_friend.size
    stride = budget + 1
    f = np.zeros(n * stride, dtype=np.float64)
    pi = np.zeros(child_node.size * budget, dtype=np.int32)
    qa = np.empty(budget, dtype=np.float64)
    qb = np.empty(budget, dtype=np.float64)
    for i in range(n):
        zi = z[i]
        cap_v = zi if zi < budget else budget
        base = i * stride
        if is_friend[i]:
            for r in range(cap_v + 1):
                f[base + r] = 1.0
            continue
        cs = child_start[i]
        ce = child_start[i + 1]
        if cs == ce:
            continue
        q_prev = qa
        q_next = qb
        q_prev[0] = 1.0
        prefix = 0
        for e in range(cs, ce):
            u = child_node[e]
            w = child_weight[e]
            fu = u * stride
            zu = z[u]
            cap_u = zu if zu < budget else budget
            if cap_u > budget - 1:
                cap_u = budget - 1
            new_prefix = prefix + cap_u
            if new_prefix > budget - 1:
                new_prefix = budget - 1
            po = e * budget
            for x in range(new_prefix + 1):
                lo = x - prefix
                if lo < 0:
                    lo = 0
                hi = cap_u if cap_u < x else x
                best = 2.0
                best_xp = 0
                for xp in range(lo, hi + 1):
                    cand = q_prev[x - xp] * (1.0 - f[fu + xp] * w)
                    if cand < best:
                        best = cand
                        best_xp = xp
                q_next[x] = best
                pi[po + x] = best_xp
            tmp = q_prev
            q_prev = q_next
            q_next = tmp
            prefix = new_prefix
        for r in range(1, cap_v + 1):
            f[base + r] = 1.0 - q_prev[r - 1]
    return f, pi
