"""Maximum subgraph density ``d(H) = max_F e(F)/v(F)`` computed exactly.

The flow route runs Dinkelbach's iteration on Goldberg's min-cut network
(solved with scipy's Dinic max-flow):
for a rational guess ``g = p/q`` the cut yields
``max_S q*e(S) - p*|S|``, and a positive maximum produces a strictly denser
set to try next. All capacities are integers, so the result is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .exceptions import EmptyGraphError, InvalidArgumentError
from .graphs import Graph

FLOW_LIMIT = 2000
ENUMERATION_LIMIT = 15


@dataclass(frozen=True)
class DensityWitness:
    """Exact maximum density and a smallest vertex set attaining it."""

    value: Fraction
    witness: tuple

    @property
    def size(self) -> int:
        return len(self.witness)

    def subgraph(self, H: Graph) -> Graph:
        return H.induced_subgraph(self.witness)

    def to_dict(self) -> dict:
        return {"value": f"{self.value.numerator}/{self.value.denominator}",
                "value_float": float(self.value),
                "witness": [v + 1 for v in self.witness]}


def _induced_edges(H, S):
    S = set(S)
    return sum(1 for i, j in H.edges.tolist() if i in S and j in S)


def _cut(H, g, forced=None):
    """Return ``(max_S q e(S) - p |S|, minimal maximizer)`` for ``g = p/q``.

    With ``forced`` set, the maximum is taken over sets containing that
    vertex; the vertex is contracted into the source.
    """
    p, q = g.numerator, g.denominator
    n, m = H.n, H.m
    s, t = n, n + 1
    deg = H.degrees.astype(np.int64)
    ei, ej = H.edges[:, 0], H.edges[:, 1]
    verts = np.arange(n, dtype=np.int64)
    rows = [np.full(n, s), verts, ei, ej]
    cols = [verts, np.full(n, t), ej, ei]
    caps = [np.full(n, q * m, dtype=np.int64), q * m + 2 * p - q * deg,
            np.full(m, q, dtype=np.int64), np.full(m, q, dtype=np.int64)]
    constant = 0
    if forced is not None:
        # arcs at the forced vertex become source arcs or a constant cut term
        constant = int(caps[1][forced])
        nb = np.array(sorted(H.neighbor_sets[forced]), dtype=np.int64)
        keep = [np.ones(n, bool), np.ones(n, bool), (ei != forced) & (ej != forced),
                (ei != forced) & (ej != forced)]
        keep[0][forced] = keep[1][forced] = False
        rows = [r[k] for r, k in zip(rows, keep)] + [np.full(len(nb), s)]
        cols = [c[k] for c, k in zip(cols, keep)] + [nb]
        caps = [c[k] for c, k in zip(caps, keep)] + [np.full(len(nb), q, dtype=np.int64)]
    rows, cols, caps = np.concatenate(rows), np.concatenate(cols), np.concatenate(caps)
    if caps.size and caps.max() > np.iinfo(np.int32).max:
        raise InvalidArgumentError("graph too large for 32-bit flow capacities")
    C = sp.csr_matrix((caps.astype(np.int32), (rows, cols)), shape=(n + 2, n + 2))
    res = maximum_flow(C, s, t, method="dinic")
    cut = int(res.flow_value) + constant
    # minimal source side: vertices reachable from s along positive residual arcs
    R = (C - res.flow).tocsr()
    R.data[R.data < 0] = 0
    R.eliminate_zeros()
    reach = breadth_first_order(R, s, directed=True, return_predecessors=False)
    S = sorted(int(v) for v in reach if v < n and v != forced)
    if forced is not None:
        S = sorted(S + [forced])
    # cut = q m n + 2 (p |S| - q e(S))
    best = (q * m * n - cut) // 2
    return best, S


def _density_flow(H):
    g = Fraction(H.m, H.n)
    while True:
        best, S = _cut(H, g)
        if best <= 0:
            break
        g = Fraction(_induced_edges(H, S), len(S))
    witness = None
    for v in range(H.n):
        best, S = _cut(H, g, forced=v)
        if best == 0 and (witness is None or len(S) < len(witness)):
            witness = S
    return DensityWitness(g, tuple(witness))


def subset_edge_counts(H: Graph) -> np.ndarray:
    """Edge count of the induced subgraph for every vertex subset, indexed by bitmask."""
    if H.n > 24:
        raise InvalidArgumentError("subset tables are limited to 24 vertices")
    nbr = np.zeros(H.n, dtype=np.int64)
    for i, j in H.edges.tolist():
        nbr[i] |= 1 << j
        nbr[j] |= 1 << i
    E = np.zeros(1 << H.n, dtype=np.int64)
    for b in range(H.n):
        rest = np.arange(1 << b, dtype=np.int64)
        E[(1 << b):(1 << (b + 1))] = E[:1 << b] + np.bitwise_count(rest & nbr[b])
    return E


def _density_enumerate(H):
    E = subset_edge_counts(H)
    sizes = np.bitwise_count(np.arange(len(E), dtype=np.int64))
    best_val, best_mask = None, None
    for size in range(1, H.n + 1):
        masks = np.flatnonzero(sizes == size)
        top = masks[np.argmax(E[masks])]
        val = Fraction(int(E[top]), size)
        if best_val is None or val > best_val:
            best_val, best_mask = val, int(top)
    witness = tuple(b for b in range(H.n) if best_mask >> b & 1)
    return DensityWitness(best_val, witness)


def max_density(H: Graph, method: str = "auto") -> DensityWitness:
    """Exact maximum density of ``H`` with a minimum-cardinality witness.

    Args:
        H: graph with at least one edge.
        method: ``"flow"`` (parametric min cut), ``"enumerate"`` (all vertex
            subsets, ``v(H) <= 15``) or ``"auto"`` (flow).

    Returns:
        DensityWitness whose ``witness`` is sorted ascending. Among maximizers
        of the smallest size, the flow route returns the inclusion-minimal
        maximizer containing the lowest-numbered possible vertex.
    """
    if H.m == 0:
        raise EmptyGraphError("maximum density needs a graph with at least one edge")
    if method == "auto":
        method = "flow"
    if method == "flow":
        if H.n > FLOW_LIMIT:
            raise InvalidArgumentError(f"flow route supports v(H) <= {FLOW_LIMIT}")
        return _density_flow(H)
    if method == "enumerate":
        if H.n > ENUMERATION_LIMIT:
            raise InvalidArgumentError(f"enumeration supports v(H) <= {ENUMERATION_LIMIT}")
        return _density_enumerate(H)
    raise InvalidArgumentError(f"unknown method {method!r}")
