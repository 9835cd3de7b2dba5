"""Likelihood ratio, the exhaustive test, threshold regimes and the second-moment diagnostic.

Every count that can overflow a double, such as ``(n)_k q0^e``, is
handled through its natural logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import logsumexp

from .counting import DEFAULT_BUDGET, count_embeddings, edge_max_profile_all
from .density import max_density
from .exceptions import InvalidParameterError, SubgraphTooLargeError
from .graphs import Graph
from .outcomes import TestOutcome, json_float
from .validation import check_graph, check_int, check_positive, check_probability

MEDIUM_WINDOW = (0.25, 4.0)
SIZE_CUTOFF = 1.0

STRONG = "strong-distinguishable-indicative"
NOT_WEAK = "not-weakly-distinguishable-indicative"
INCONCLUSIVE = "inconclusive"


def log_falling(n: int, k: int) -> float:
    """``log (n)_k = log n!/(n-k)!`` by compensated summation."""
    if k > n:
        return -math.inf
    if k > 100_000:
        return math.lgamma(n + 1) - math.lgamma(n - k + 1)
    return math.fsum(math.log(n - i) for i in range(k))


def log_expected_count(H: Graph, n: int, q0: float) -> float:
    """``log E0 N(H; G) = log (n)_{v(H)} + e(H) log q0`` under the null with ``n`` vertices."""
    if q0 == 0.0:
        return -math.inf if H.m else log_falling(n, H.n)
    return log_falling(n, H.n) + H.m * math.log(q0)


@dataclass(frozen=True)
class LikelihoodRatio:
    """``dP1/dP0`` evaluated at a graph, with its ingredients.

    Attributes:
        ratio: ``N(H;G) / E0 N(H;G)`` (``inf`` if it overflows a double).
        log_ratio: natural log of ``ratio``; ``-inf`` when the count is zero.
        count: exact ``N(H;G)``.
        log_expected: ``log E0 N(H;G)``.
    """

    ratio: float
    log_ratio: float
    count: int
    log_expected: float

    def to_dict(self) -> dict:
        return {"ratio": json_float(self.ratio), "log_ratio": json_float(self.log_ratio),
                "count": self.count, "log_expected": json_float(self.log_expected)}


def likelihood_ratio(G: Graph, H: Graph, q0: float, budget: int = DEFAULT_BUDGET) -> LikelihoodRatio:
    """Likelihood ratio of the planted model against the null at ``G``."""
    check_graph(G)
    check_graph(H, "H", nonempty=True)
    q0 = check_probability(q0, low_open=True)
    count = count_embeddings(H, G, budget=budget)
    log_e = log_expected_count(H, G.n, q0)
    if count == 0:
        return LikelihoodRatio(0.0, -math.inf, 0, log_e)
    log_r = math.log(count) - log_e
    ratio = math.exp(log_r) if log_r < 709.0 else math.inf
    return LikelihoodRatio(ratio, log_r, count, log_e)


def exhaustive_test(G: Graph, H: Graph, q0: float, budget: int = DEFAULT_BUDGET) -> TestOutcome:
    """Search ``G`` for a copy of the densest subgraph of ``H``.

    Decision 1 iff the minimal densest subgraph ``F`` of ``H`` has at least
    one embedding in ``G``. ``q0`` only enters the reported expectation.
    """
    check_graph(G)
    check_graph(H, "H", nonempty=True)
    q0 = check_probability(q0, low_open=True)
    dw = max_density(H)
    F = dw.subgraph(H)
    count = count_embeddings(F, G, budget=budget)
    meta = {"rule": "statistic > threshold",
            "witness": [v + 1 for v in dw.witness],
            "density": f"{dw.value.numerator}/{dw.value.denominator}",
            "log_expected_null_count": json_float(log_expected_count(F, G.n, q0))}
    return TestOutcome("exhaustive", float(count), 0.0, int(count > 0), meta)


@dataclass(frozen=True)
class RegimeReport:
    """Finite-``n`` evaluation of the distinguishability conditions.

    All verdicts end in ``-indicative``: the underlying statements are
    asymptotic and a single ``n`` cannot prove them.
    """

    n: int
    q0: float
    v: int
    density: str
    density_ratio: float
    size_ratio_25: float
    size_ratio_12: float
    log_v: float
    density_over_log_v: float
    regime: str
    verdicts: tuple
    medium_window: tuple = MEDIUM_WINDOW
    size_cutoff: float = SIZE_CUTOFF

    @property
    def verdict(self) -> str:
        return self.verdicts[0]

    def to_dict(self) -> dict:
        return {"n": self.n, "q0": self.q0, "v": self.v, "density": self.density,
                "density_ratio": json_float(self.density_ratio),
                "size_ratio_25": self.size_ratio_25, "size_ratio_12": self.size_ratio_12,
                "density_over_log_v": json_float(self.density_over_log_v),
                "regime": self.regime, "verdicts": list(self.verdicts),
                "medium_window": list(self.medium_window), "size_cutoff": self.size_cutoff}


def classify_regime(d: float, v: int, window=MEDIUM_WINDOW) -> str:
    """``"low"``, ``"medium"`` or ``"high"`` from ``d / log v`` against ``window``."""
    r = d / math.log(v)
    if r < window[0]:
        return "low"
    if r > window[1]:
        return "high"
    return "medium"


def regime_report(H: Graph, n: int, q0: float, medium_window=MEDIUM_WINDOW,
                  size_cutoff: float = SIZE_CUTOFF) -> RegimeReport:
    """Evaluate the detection and indistinguishability conditions for ``H`` at size ``n``.

    Args:
        H: hidden graph with at least one edge.
        n: number of vertices of the observed graph.
        q0: null edge probability in ``(0, 1)``.
        medium_window: ``d(H)/log v(H)`` range counted as medium density.
        size_cutoff: a size ratio below this value counts as "vanishing".
    """
    check_graph(H, "H", nonempty=True)
    n = check_int(n, "n", minimum=2)
    q0 = check_probability(q0, low_open=True, high_open=True)
    check_positive(size_cutoff, "size_cutoff")
    lo, hi = medium_window
    if not 0 < lo <= hi:
        raise InvalidParameterError(f"medium_window must satisfy 0 < low <= high, got {medium_window}")
    if H.n > n:
        raise SubgraphTooLargeError(f"v(H)={H.n} exceeds n={n}")
    dw = max_density(H)
    d = float(dw.value)
    v = H.n
    density_ratio = d * math.log(1.0 / q0) / math.log(n)
    s25 = v / n ** 0.4
    s12 = v / n ** 0.5
    regime = classify_regime(d, v, medium_window)
    small25 = s25 < size_cutoff
    small12 = s12 < size_cutoff
    if density_ratio > 1.0 and v < n:
        verdict = STRONG
    elif density_ratio < 1.0 and small25:
        verdict = NOT_WEAK
    elif regime == "high" and density_ratio < 1.0:
        verdict = NOT_WEAK
    elif regime == "low" and small12:
        verdict = NOT_WEAK
    else:
        verdict = INCONCLUSIVE
    return RegimeReport(n=n, q0=q0, v=v, density=f"{dw.value.numerator}/{dw.value.denominator}",
                        density_ratio=density_ratio, size_ratio_25=s25, size_ratio_12=s12,
                        log_v=math.log(v), density_over_log_v=d / math.log(v), regime=regime,
                        verdicts=(verdict,), medium_window=(float(lo), float(hi)),
                        size_cutoff=float(size_cutoff))


def log_g(u: int, k: int, n: int, e_u: int, e: int, q0: float) -> float:
    """Natural log of the Stirling-bound term ``g(u)`` for ``2 <= u <= k``."""
    lq = math.log(q0)
    if u < k:
        return math.fsum([
            -1.5 * math.log(2 * math.pi), -2 * k + 2, (2 * k + 1) * math.log(k),
            -u * math.log(n - u), -(2 * (k - u) + 1) * math.log(k - u),
            2 * (k - u) + u, -(u + 0.5) * math.log(u), -e_u * lq])
    return math.fsum([
        (k + 0.5) * math.log(k), -k + 1, (n - k + 0.5) * math.log(n - k), -n + k + 1,
        -0.5 * math.log(2 * math.pi), -(n + 0.5) * math.log(n), n, -e * lq])


def log_delta_bar_terms(H: Graph, n: int, q0: float, profile=None) -> np.ndarray:
    """Per-overlap logs of ``(n)_{2k-u} (k!)^2 / (u! ((k-u)!)^2) q0^{2e - e_H(u)}``, ``u = 2..k``.

    Entry ``u - 2`` upper-bounds the total of ``E0[X_1 X_2]`` over labeling
    pairs whose images share exactly ``u`` vertices, with equality when every
    ``u``-subset of ``H`` induces ``e_H(u)`` edges (cliques, for instance).
    """
    k, e = H.n, H.m
    if profile is None:
        profile = edge_max_profile_all(H)
    lq = math.log(q0)
    lk = math.lgamma(k + 1)
    out = np.empty(k - 1)
    for u in range(2, k + 1):
        out[u - 2] = math.fsum([log_falling(n, 2 * k - u), 2 * lk, -math.lgamma(u + 1),
                                -2 * math.lgamma(k - u + 1), (2 * e - int(profile[u])) * lq])
    return out


def delta_bar(H: Graph, n: int, q0: float) -> float:
    """Closed-form ``Delta-bar(n, H)``: the overlapping-pair second-moment sum."""
    return float(math.exp(logsumexp(log_delta_bar_terms(H, n, q0))))


@dataclass(frozen=True)
class SecondMomentReport:
    """Janson-type concentration diagnostic for ``N(H; G)`` under the null.

    Attributes:
        log_expected_count: ``log E0 N(H;G)``.
        ratio_bound: ``sum_{u=2}^{k} g(u)``, the Stirling upper bound on
            ``Delta-bar / (E0 N)^2``.
        per_u_terms: tuples ``(u, e_H(u), g(u))``.
        log_g: natural logs of the ``g(u)``, finite even when ``g`` overflows.
        log_delta_bar: log of the closed-form ``Delta-bar``.
        ratio_exact: ``Delta-bar / (E0 N)^2`` without the Stirling step.
    """

    n: int
    q0: float
    k: int
    e: int
    log_expected_count: float
    ratio_bound: float
    log_ratio_bound: float
    per_u_terms: tuple
    log_g: tuple
    log_delta_bar: float
    ratio_exact: float
    janson_exponent_factor: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        return {"n": self.n, "q0": self.q0, "k": self.k, "e": self.e,
                "log_expected_count": json_float(self.log_expected_count),
                "ratio_bound": json_float(self.ratio_bound),
                "log_ratio_bound": json_float(self.log_ratio_bound),
                "per_u_terms": [[u, eu, json_float(g)] for u, eu, g in self.per_u_terms],
                "log_g": [json_float(x) for x in self.log_g],
                "log_delta_bar": json_float(self.log_delta_bar),
                "ratio_exact": json_float(self.ratio_exact),
                "janson_exponent_factor": json_float(self.janson_exponent_factor)}


def _safe_exp(x):
    return math.exp(x) if x < 709.0 else math.inf


def second_moment_report(H: Graph, n: int, q0: float, budget: int = DEFAULT_BUDGET) -> SecondMomentReport:
    """Evaluate every ``g(u)`` in log space along with ``Delta-bar`` and ``E0 N``.

    ``janson_exponent_factor`` is ``(E0 N)^2 / (2 (Delta-bar + E0 N))``; the
    null probability that ``N`` falls below ``(1 - eps) E0 N`` is at most
    ``exp(-eps^2 * factor)``.
    """
    check_graph(H, "H", nonempty=True)
    n = check_int(n, "n", minimum=2)
    q0 = check_probability(q0, low_open=True, high_open=True)
    k, e = H.n, H.m
    if k < 2:
        raise InvalidParameterError("H needs at least two vertices")
    if k >= n:
        raise SubgraphTooLargeError(f"v(H)={k} must be below n={n}")
    profile = edge_max_profile_all(H, budget=budget)
    logs = [log_g(u, k, n, int(profile[u]), e, q0) for u in range(2, k + 1)]
    terms = tuple((u, int(profile[u]), _safe_exp(lg)) for u, lg in zip(range(2, k + 1), logs))
    log_bound = float(logsumexp(logs))
    log_en = log_expected_count(H, n, q0)
    log_db = float(logsumexp(log_delta_bar_terms(H, n, q0, profile)))
    log_ratio = log_db - 2 * log_en
    # log of (E N)^2 / (2 (Delta + E N))
    log_janson = 2 * log_en - math.log(2) - float(np.logaddexp(log_db, log_en))
    return SecondMomentReport(n=n, q0=q0, k=k, e=e, log_expected_count=log_en,
                              ratio_bound=_safe_exp(log_bound), log_ratio_bound=log_bound,
                              per_u_terms=terms, log_g=tuple(logs), log_delta_bar=log_db,
                              ratio_exact=_safe_exp(log_ratio),
                              janson_exponent_factor=_safe_exp(log_janson))
