"""Exact embedding counts ``N(H; G)`` and induced edge profiles ``e_H(u)``."""

from __future__ import annotations

import math

import numpy as np

from .density import subset_edge_counts
from .exceptions import BudgetExceededError, InvalidArgumentError
from .graphs import Graph

DEFAULT_BUDGET = 10**8


def _search_order(H):
    """Order non-isolated vertices so each one (after the first of its component) has an earlier neighbor."""
    nbrs = H.neighbor_sets
    deg = H.degrees
    remaining = {v for v in range(H.n) if deg[v] > 0}
    order = []
    while remaining:
        placed = set(order)
        frontier = [v for v in remaining if nbrs[v] & placed]
        pool = frontier or list(remaining)
        # most already-placed neighbors first, then highest degree, then lowest index
        v = min(pool, key=lambda u: (-len(nbrs[u] & placed), -int(deg[u]), u))
        order.append(v)
        remaining.discard(v)
    return order


def count_embeddings(H: Graph, G: Graph, budget: int = DEFAULT_BUDGET) -> int:
    """Number of injective labelings ``phi: V(H) -> V(G)`` mapping every edge of ``H`` onto an edge of ``G``.

    Backtracking over the vertices of ``H`` in a connectivity-first order;
    candidates for a vertex are the common ``G``-neighbors of its already
    mapped ``H``-neighbors, restricted to vertices of sufficient degree.
    Isolated vertices of ``H`` are counted in closed form.

    Raises:
        BudgetExceededError: if more than ``budget`` search nodes are visited.
    """
    if H.n > G.n:
        raise InvalidArgumentError(f"v(H)={H.n} exceeds v(G)={G.n}")
    order = _search_order(H)
    n_iso = H.n - len(order)
    free = G.n - len(order)
    iso_factor = math.perm(free, n_iso)
    if not order:
        return iso_factor

    hn = H.neighbor_sets
    gn = G.neighbor_sets
    gdeg = G.degrees
    hdeg = H.degrees
    pos = {v: a for a, v in enumerate(order)}
    back = [[pos[u] for u in hn[v] if pos.get(u, len(order)) < a] for a, v in enumerate(order)]
    need = [int(hdeg[v]) for v in order]
    eligible = [frozenset(np.flatnonzero(gdeg >= d).tolist()) for d in need]
    image = [0] * len(order)
    used = set()
    last = len(order) - 1
    visited = 0

    def candidates(a):
        if back[a]:
            sets = sorted((gn[image[b]] for b in back[a]), key=len)
            cand = set(sets[0])
            for s in sets[1:]:
                cand &= s
            cand &= eligible[a]
        else:
            cand = set(eligible[a])
        cand -= used
        return cand

    def extend(a):
        nonlocal visited
        visited += 1
        if visited > budget:
            raise BudgetExceededError(
                f"embedding search exceeded {budget} nodes", visited=visited, budget=budget)
        cand = candidates(a)
        if a == last:
            return len(cand)
        total = 0
        for c in cand:
            image[a] = c
            used.add(c)
            total += extend(a + 1)
            used.discard(c)
        return total

    return extend(0) * iso_factor


def edge_max_profile(H: Graph, u: int, budget: int = DEFAULT_BUDGET) -> int:
    """``e_H(u)``: the largest edge count of an induced subgraph of ``H`` on ``u`` vertices."""
    if not 1 <= u <= H.n:
        raise InvalidArgumentError(f"u must lie in 1..{H.n}, got {u}")
    return int(edge_max_profile_all(H, budget=budget)[u])


def edge_max_profile_all(H: Graph, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Array ``e`` with ``e[u] = e_H(u)`` for ``u = 0..v(H)``."""
    if H.n <= 20:
        E = subset_edge_counts(H)
        sizes = np.bitwise_count(np.arange(len(E), dtype=np.int64))
        prof = np.zeros(H.n + 1, dtype=np.int64)
        np.maximum.at(prof, sizes, E)
        return prof
    prof = np.zeros(H.n + 1, dtype=np.int64)
    prof[H.n] = H.m
    for u in range(2, H.n):
        prof[u] = _profile_branch_and_bound(H, u, budget)
    return prof


def _profile_branch_and_bound(H, u, budget):
    """Branch and bound for ``e_H(u)`` on larger graphs (vertices in decreasing-degree order)."""
    order = sorted(range(H.n), key=lambda v: (-int(H.degrees[v]), v))
    nbrs = H.neighbor_sets
    # greedy incumbent: repeatedly add the vertex with most edges into the set
    chosen = [order[0]]
    while len(chosen) < u:
        cs = set(chosen)
        best = max((v for v in order if v not in cs), key=lambda v: len(nbrs[v] & cs))
        chosen.append(best)
    cs = set(chosen)
    incumbent = sum(len(nbrs[v] & cs) for v in chosen) // 2
    visited = 0

    def rec(start, chosen_set, edges):
        nonlocal visited, incumbent
        visited += 1
        if visited > budget:
            raise BudgetExceededError(
                f"profile search exceeded {budget} nodes", visited=visited, budget=budget)
        slots = u - len(chosen_set)
        if slots == 0:
            incumbent = max(incumbent, edges)
            return
        if len(order) - start < slots:
            return
        if _upper(start, chosen_set, edges, slots) <= incumbent:
            return
        v = order[start]
        gain = len(nbrs[v] & chosen_set)
        chosen_set.add(v)
        rec(start + 1, chosen_set, edges + gain)
        chosen_set.discard(v)
        rec(start + 1, chosen_set, edges)

    def _upper(start, chosen_set, edges, slots):
        # edges into the chosen set plus a complete graph among the new vertices
        rest = order[start:]
        to_chosen = sorted((len(nbrs[v] & chosen_set) for v in rest), reverse=True)[:slots]
        return edges + sum(to_chosen) + slots * (slots - 1) // 2

    rec(0, set(), 0)
    return incumbent
