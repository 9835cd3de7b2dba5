"""Spectral detection and identification of a planted subgraph.

The detection statistic is the top eigenvalue of the shifted adjacency
matrix. Identification scores each vertex against the top-``k`` support of
the leading eigenvector computed with that vertex removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .eigen import DEFAULT_TOL, canonical_sign, leave_one_out_eigenvectors, top_eigenpair
from .exceptions import InvalidParameterError
from .graphs import Graph, shifted_adjacency, sigma
from .outcomes import TestOutcome, json_float
from .validation import check_graph, check_int, check_positive, check_probability

DETECTION_CONSTANT = 2.1


def detection_threshold(n: int, q0: float, constant: float = DETECTION_CONSTANT) -> float:
    """``constant * sigma(q0) * sqrt(n)``."""
    return constant * sigma(q0) * math.sqrt(n)


def spectral_test(G: Graph, q0: float, tol: float = DEFAULT_TOL, method: str = "auto",
                  seed: int = 0, constant: float = DETECTION_CONSTANT) -> TestOutcome:
    """Reject the null when ``lambda_1`` of the shifted adjacency reaches ``2.1 sigma(q0) sqrt(n)``.

    The test never looks at ``H``.
    """
    check_graph(G)
    q0 = check_probability(q0, low_open=True, high_open=True)
    M = shifted_adjacency(G, q0).matrix
    pair = top_eigenpair(M, tol=tol, method=method, seed=seed)
    thr = detection_threshold(G.n, q0, constant)
    meta = {"rule": "statistic >= threshold",
            "ratio": pair.value / (sigma(q0) * math.sqrt(G.n)),
            "eigen_residual": pair.residual, "eigen_method": pair.method,
            "constant": constant}
    return TestOutcome("spectral", pair.value, thr, int(pair.value >= thr), meta)


def identification_threshold(k: int, q0: float) -> float:
    """``t = k q0 + 3 sqrt(k q0 ln k)`` (natural logarithm)."""
    return k * q0 + 3.0 * math.sqrt(k * q0 * math.log(k))


@dataclass(frozen=True)
class IdentificationResult:
    """Output of the leave-one-out spectral identification.

    Attributes:
        selected: vertices (0-based, ascending) with score above ``threshold``.
        scores: ``scores[i]`` is the number of edges from ``i`` into ``S_i``;
            ``-1`` marks a skipped vertex.
        candidate_sets: row ``i`` lists ``S_i``, the ``k`` largest-magnitude
            coordinates of the leave-``i``-out eigenvector.
        threshold: the score cut ``t``.
        refined: second-stage degree selection, if requested.
        skipped: vertices whose eigen-solve failed the residual check.
    """

    selected: tuple
    scores: np.ndarray
    candidate_sets: np.ndarray
    threshold: float
    k: int
    q0: float
    refined: tuple | None = None
    skipped: tuple = ()
    metadata: dict = field(default_factory=dict)

    def to_dict(self, include_candidates: bool = False) -> dict:
        d = {"selected": [i + 1 for i in self.selected],
             "refined": None if self.refined is None else [i + 1 for i in self.refined],
             "per_vertex_scores": [int(s) for s in self.scores],
             "threshold": self.threshold, "k": self.k, "q0": self.q0,
             "skipped": [i + 1 for i in self.skipped], "metadata": self.metadata}
        if include_candidates:
            d["candidate_sets"] = (self.candidate_sets + 1).tolist()
        return d


def top_k_support(X, k, exclude_diagonal=True):
    """Per column, indices of the ``k`` largest magnitudes; ties go to the lower index."""
    mag = np.abs(X)
    if exclude_diagonal:
        mag = mag.copy()
        np.fill_diagonal(mag, -1.0)
    order = np.argsort(-mag, axis=0, kind="stable")
    return order[:k].T


def identify(G: Graph, q0: float, k: int, method: str = "secular", tol: float = 1e-6,
             refine_eps: float | None = None) -> IdentificationResult:
    """Select the vertices of ``G`` that look attached to a planted ``k``-vertex subgraph.

    For each vertex ``i`` the leading eigenvector of the shifted adjacency
    with row and column ``i`` removed gives a candidate set ``S_i`` of its
    ``k`` largest-magnitude coordinates; ``i`` is selected when it has more
    than ``t = k q0 + 3 sqrt(k q0 ln k)`` neighbors in ``S_i``.

    Args:
        G: observed graph.
        q0: null edge probability in ``[0, 1)``; 0 is the noiseless case.
        k: size of the hidden subgraph, ``1 <= k <= n - 1``.
        method: leave-one-out eigen route, ``"secular"`` or ``"power"``.
        tol: residual tolerance of each leave-one-out eigenpair.
        refine_eps: when given, also run :func:`refine_low_degree` on the
            selection with this margin.
    """
    check_graph(G)
    q0 = check_probability(q0, high_open=True)
    k = check_int(k, "k", minimum=1, maximum=G.n - 1)
    M = shifted_adjacency(G, q0).matrix
    loo = leave_one_out_eigenvectors(M, tol=tol, method=method)
    S = top_k_support(loo.vectors, k)
    A = G.adjacency()
    scores = np.take_along_axis(A, S, axis=1).sum(axis=1).astype(np.int64)
    skipped = loo.failed
    if skipped:
        scores[list(skipped)] = -1
    t = identification_threshold(k, q0)
    selected = tuple(int(i) for i in np.flatnonzero(scores > t))
    refined = None
    if refine_eps is not None and selected:
        refined = refine_low_degree(G, selected, q0, refine_eps)
    meta = {"log_base": "natural", "eigen_method": method,
            "direct_fallbacks": len(loo.fallback),
            "max_residual": json_float(loo.residuals.max())}
    return IdentificationResult(selected, scores, S, t, k, q0, refined, skipped, meta)


def degrees_into(G: Graph, S) -> np.ndarray:
    """``deg_S(i)`` for every vertex ``i`` of ``G``."""
    inS = np.zeros(G.n, dtype=bool)
    inS[list(S)] = True
    e = G.edges
    out = np.bincount(e[inS[e[:, 0]], 1], minlength=G.n)
    out += np.bincount(e[inS[e[:, 1]], 0], minlength=G.n)
    return out


def refine_low_degree(G: Graph, S, q0: float, eps: float) -> tuple:
    """Vertices ``i`` of ``G`` with ``deg_S(i) > (1 + eps) q0 |S|``.

    A second pass after identification that can recover planted vertices
    of low degree in ``H`` once a well-connected core ``S`` is known.
    """
    check_graph(G)
    q0 = check_probability(q0, high_open=True)
    if eps < 0:
        raise InvalidParameterError(f"eps must be non-negative, got {eps}")
    S = sorted(set(int(i) for i in S))
    if not S:
        raise InvalidParameterError("S must be non-empty")
    d = degrees_into(G, S)
    return tuple(int(i) for i in np.flatnonzero(d > (1 + eps) * q0 * len(S)))


def significant_set(H: Graph, c: float) -> tuple:
    """Vertices of ``H`` with degree above ``c sqrt(v log v)``."""
    check_graph(H, "H")
    c = check_positive(c, "c")
    v = H.n
    bound = c * math.sqrt(v * math.log(v)) if v > 1 else 0.0
    return tuple(int(i) for i in np.flatnonzero(H.degrees > bound))


# ------------------------------------------------------------------- balance


def _balance(A):
    """``(epsilon, mu, lambda_1)`` of a 0/1 adjacency matrix."""
    v = A.shape[0]
    w, V = np.linalg.eigh(A)
    l1 = float(w[-1])
    lead = canonical_sign(V[:, -1])
    mu = math.sqrt(v) * float(np.abs(lead).min())
    if l1 <= 1e-12:
        return math.nan, mu, l1
    l2 = float(w[-2]) if v > 1 else l1
    # bipartite graphs give exactly 0; clip the rounding
    eps = min(1.0, max(0.0, 1.0 - max(l2, -float(w[0])) / l1))
    return eps, mu, l1


@dataclass(frozen=True)
class BalanceCertificate:
    """Spectral balance quantities of ``H`` and of its single-vertex deletions.

    Attributes:
        epsilon: ``1 - max(lambda_2, -lambda_v) / lambda_1`` of ``A_H``.
        mu: ``sqrt(v) * min_i |v_i|`` for the leading eigenvector.
        strict_epsilon: minimum of ``epsilon`` over all ``H \\ i``.
        strict_mu: minimum of ``mu`` over all ``H \\ i``.
        lambda_1: leading eigenvalue of ``A_H``.
        lambda_minus: ``min_i lambda_1(A_{H \\ i})``.
        edgeless_deletions: vertices whose deletion leaves no edge; their
            ``epsilon`` is undefined and counts as 0 in ``strict_epsilon``.
    """

    epsilon: float
    mu: float
    strict_epsilon: float
    strict_mu: float
    lambda_1: float
    lambda_minus: float
    edgeless_deletions: tuple = ()

    def to_dict(self) -> dict:
        return {k: json_float(getattr(self, k)) for k in
                ("epsilon", "mu", "strict_epsilon", "strict_mu", "lambda_1", "lambda_minus")} | \
            {"edgeless_deletions": [i + 1 for i in self.edgeless_deletions]}


def balance_certificate(H: Graph) -> BalanceCertificate:
    """Exact (dense) balance quantities for ``H`` with ``v(H) >= 3``."""
    check_graph(H, "H", nonempty=True)
    if H.n < 3:
        raise InvalidParameterError("balance certificate needs v(H) >= 3")
    A = H.adjacency()
    eps, mu, l1 = _balance(A)
    eps_i, mu_i, l1_i, edgeless = [], [], [], []
    for i in range(H.n):
        keep = np.r_[0:i, i + 1:H.n]
        e, m, l = _balance(A[np.ix_(keep, keep)])
        if math.isnan(e):
            edgeless.append(i)
            e = 0.0
        eps_i.append(e)
        mu_i.append(m)
        l1_i.append(l)
    return BalanceCertificate(eps, mu, min(eps_i), min(mu_i), l1, min(l1_i), tuple(edgeless))


@dataclass(frozen=True)
class IdentificationCondition:
    """Finite-``n`` evaluation of the sufficient condition for exact identification.

    ``holds`` requires ``alpha < 1`` and ``|lambda_minus| / sqrt(n) > rhs``
    with ``rhs = 3 sigma(q0) / (epsilon delta)``, where ``epsilon`` and
    ``mu`` are the strict (deletion-minimized) balance values.
    """

    holds: bool
    alpha_ok: bool
    spectral_ok: bool
    alpha: float
    c: float
    lhs: float
    rhs: float
    delta: float
    certificate: BalanceCertificate

    def to_dict(self) -> dict:
        return {"holds": self.holds, "alpha_ok": self.alpha_ok, "spectral_ok": self.spectral_ok,
                "alpha": json_float(self.alpha), "c": json_float(self.c),
                "lhs": json_float(self.lhs), "rhs": json_float(self.rhs), "delta": self.delta,
                "certificate": self.certificate.to_dict()}


def identification_condition(H: Graph, n: int, q0: float, delta: float,
                       certificate: BalanceCertificate | None = None) -> IdentificationCondition:
    """Check the balance and eigenvalue conditions under which identification succeeds.

    Returns ``alpha = 2 delta / (mu^2 (1 - delta))`` and
    ``c = 4 / ((1 - alpha)(1 - q0))``, the significance constant for
    :func:`significant_set` (``inf`` when ``alpha >= 1``).
    """
    n = check_int(n, "n", minimum=1)
    q0 = check_probability(q0, low_open=True, high_open=True)
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    cert = certificate if certificate is not None else balance_certificate(H)
    mu, eps = cert.strict_mu, cert.strict_epsilon
    alpha = 2 * delta / (mu * mu * (1 - delta)) if mu > 0 else math.inf
    alpha_ok = alpha < 1.0
    c = 4.0 / ((1 - alpha) * (1 - q0)) if alpha_ok else math.inf
    lhs = abs(cert.lambda_minus) / math.sqrt(n)
    rhs = 3 * sigma(q0) / (eps * delta) if eps > 0 else math.inf
    spectral_ok = lhs > rhs
    return IdentificationCondition(alpha_ok and spectral_ok, alpha_ok, spectral_ok,
                                   alpha, c, lhs, rhs, delta, cert)
