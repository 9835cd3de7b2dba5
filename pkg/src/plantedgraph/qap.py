"""Quadratic assignment objective, its exact maximum, and the rank-one lift.

An assignment ``phi: [k] -> [n]`` is encoded by the 0/1 matrix ``Pi``
(``n x k``) with ``Pi[phi(i), i] = 1``. The lift uses the row-major vector
``y = vec(Pi)``, so entry ``j*k + i`` of ``y`` is ``Pi[j, i]``.
"""

from __future__ import annotations

import numpy as np

from .exceptions import BudgetExceededError, InvalidEmbeddingError
from .graphs import Embedding, Graph
from .validation import check_graph

DEFAULT_BUDGET = 10**8


def _targets(phi, H, G):
    if isinstance(phi, Embedding):
        t = np.asarray(phi.targets, dtype=np.int64)
    else:
        t = np.asarray(phi, dtype=np.int64)
    if t.shape != (H.n,):
        raise InvalidEmbeddingError(f"expected {H.n} targets, got shape {t.shape}")
    if t.size and (t.min() < 0 or t.max() >= G.n):
        raise InvalidEmbeddingError("targets outside the vertex range of G")
    if np.unique(t).size != t.size:
        raise InvalidEmbeddingError("embedding is not injective")
    return t


def qap_objective(G: Graph, H: Graph, phi, form: str = "edges") -> int:
    """``Tr(A_H Pi^T A_G Pi)`` for the assignment ``phi``.

    Args:
        form: ``"edges"`` evaluates ``2 * sum over E(H) of A_G(phi(i), phi(j))``;
            ``"trace"`` multiplies the matrices. Both are exact integers.
    """
    check_graph(G)
    check_graph(H, "H")
    t = _targets(phi, H, G)
    if form == "edges":
        return 2 * sum(G.has_edge(int(t[i]), int(t[j])) for i, j in H.edges.tolist())
    if form == "trace":
        Pi = np.zeros((G.n, H.n), dtype=np.int64)
        Pi[t, np.arange(H.n)] = 1
        AG = G.adjacency().astype(np.int64)
        AH = H.adjacency().astype(np.int64)
        return int(np.trace(AH @ Pi.T @ AG @ Pi))
    raise ValueError(f"unknown form {form!r}")


def qap_brute_force(G: Graph, H: Graph, budget: int = DEFAULT_BUDGET):
    """Exact ``OPT(G; H)`` by depth-first search with an edge-count bound.

    Vertices of ``H`` are assigned in index order; a branch is cut when its
    score plus two points per still-undecided ``H`` edge cannot beat the
    incumbent. The first maximizer met in lexicographic order is returned.

    Returns:
        ``(opt, targets)`` with ``targets`` a tuple of 0-based vertices of ``G``.

    Raises:
        BudgetExceededError: more than ``budget`` search nodes.
    """
    check_graph(G)
    check_graph(H, "H")
    if H.n > G.n:
        raise InvalidEmbeddingError(f"v(H)={H.n} exceeds v(G)={G.n}")
    k = H.n
    gn = G.neighbor_sets
    back = [[j for j in H.neighbor_sets[i] if j < i] for i in range(k)]
    # edges whose later endpoint is >= a, i.e. not yet scored at depth a
    remaining = [sum(len(back[i]) for i in range(a, k)) for a in range(k + 1)]
    full = 2 * H.m
    best = [-1, None]
    phi = [0] * k
    used = [False] * G.n
    visited = 0

    def rec(a, score):
        nonlocal visited
        visited += 1
        if visited > budget:
            raise BudgetExceededError(f"QAP search exceeded {budget} nodes", visited=visited, budget=budget)
        if a == k:
            if score > best[0]:
                best[0], best[1] = score, tuple(phi)
            return
        if score + 2 * remaining[a] <= best[0]:
            return
        for c in range(G.n):
            if used[c]:
                continue
            gain = 2 * sum(1 for j in back[a] if phi[j] in gn[c])
            phi[a] = c
            used[c] = True
            rec(a + 1, score + gain)
            used[c] = False
            if best[0] == full:
                return

    rec(0, 0)
    return best[0], best[1]


def lift_assignment(phi, n: int, k: int) -> np.ndarray:
    """Rank-one lift ``Y = y y^T`` with ``y = vec(Pi)`` (dimension ``nk``)."""
    t = np.asarray(phi.targets if isinstance(phi, Embedding) else phi, dtype=np.int64)
    if t.shape != (k,) or (k and (t.min() < 0 or t.max() >= n)) or np.unique(t).size != k:
        raise InvalidEmbeddingError("phi must be an injective map [k] -> [n]")
    y = np.zeros(n * k)
    y[t * k + np.arange(k)] = 1.0
    return np.outer(y, y)


def kron_apply(AG, AH, Y):
    """``(A_G kron A_H) Y`` without forming the Kronecker product."""
    n, k = AG.shape[0], AH.shape[0]
    Y3 = Y.reshape(n, k, -1)
    out = np.einsum("jJ,iI,JIm->jim", AG, AH, Y3, optimize=True)
    return out.reshape(n * k, -1)


def sdp_objective(Y, AG, AH) -> float:
    """``Tr((A_G kron A_H) Y)`` computed on the 4-index view of ``Y``."""
    n, k = AG.shape[0], AH.shape[0]
    Y4 = np.asarray(Y).reshape(n, k, n, k)
    return float(np.einsum("jiJI,jJ,iI->", Y4, AG, AH, optimize=True))


def constraint_residuals(Y, n: int, k: int, psd: bool = True) -> dict:
    """Violation of every relaxation constraint, each reported as a non-negative number.

    Keys: ``psd`` (minus the smallest eigenvalue, clipped at 0), ``box``,
    ``total_sum``, ``row_traces`` (``max_i |sum_j Y[(j,i),(j,i)] - 1|``),
    ``col_traces`` (``max_j`` excess of ``sum_i Y[(j,i),(j,i)]`` over 1)
    and ``symmetry``.
    """
    Y = np.asarray(Y, dtype=float)
    d = np.diagonal(Y).reshape(n, k)
    res = {"box": float(max(0.0, -Y.min(), Y.max() - 1.0)),
           "total_sum": float(abs(Y.sum() - k * k)),
           "row_traces": float(np.abs(d.sum(axis=0) - 1.0).max()),
           "col_traces": float(max(0.0, (d.sum(axis=1) - 1.0).max())),
           "symmetry": float(np.abs(Y - Y.T).max())}
    if psd:
        res["psd"] = max(0.0, -min_eigenvalue(Y))
    return res


def min_eigenvalue(Y) -> float:
    """Smallest eigenvalue of the symmetric part of ``Y``."""
    Y = np.asarray(Y, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (Y + Y.T))[0])
