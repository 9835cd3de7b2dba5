"""Explicit feasible point of the relaxation on a null graph, and the Laplacian check.

On a dense random graph the relaxation admits a feasible ``Y`` whose
objective is at least ``2 e(H)``, so the relaxation test fires even without
a planted copy. The construction depends on whether the smallest adjacency
eigenvalue of ``H`` satisfies ``lambda_k >= (2 e(H) - k^2) / k``:

* high case: ``Y = a (D kron I) + b (A kron (A_H + u I)) + c J``
* low case:  ``Y = b ((D - A) kron I) + b (A kron J_k)``

with ``D``, ``A`` the degree and adjacency matrices of ``G``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .exceptions import EmptyGraphError, InvalidParameterError
from .graphs import Graph, sigma
from .outcomes import json_float
from .qap import constraint_residuals, min_eigenvalue, sdp_objective
from .validation import check_graph, check_probability

HIGH = "lambda_k_high"
LOW = "lambda_k_low"


@dataclass(frozen=True)
class NullCertificate:
    """The assembled matrix, its coefficients and its feasibility record.

    Attributes:
        case: ``"lambda_k_high"`` or ``"lambda_k_low"``.
        u, a, b, c: coefficients (``a``, ``c`` and ``u`` are 0 in the low case).
        u_raw: ``u`` before the positive part.
        u_clipped: True when the positive part changed ``u``.
        residuals: constraint violations as in :func:`qap.constraint_residuals`.
        min_eigenvalue: smallest eigenvalue of ``Y``.
        objective: ``Tr((A_G kron A_H) Y)``.
        feasible: every residual at most ``tol`` and ``min_eigenvalue >= -psd_tol``.
        exact: total sum and per-label trace recomputed in rational arithmetic.
        ratios: the two regime ratios; each is below 1 inside the regime.
        Y: the matrix itself (omitted from ``to_dict``).
    """

    case: str
    u: float
    u_raw: float
    u_clipped: bool
    a: float
    b: float
    c: float
    residuals: dict
    min_eigenvalue: float
    objective: float
    feasible: bool
    exact: dict
    ratios: dict
    lambda_k: float
    n: int
    k: int
    Y: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {"case": self.case, "u": self.u, "u_raw": self.u_raw, "u_clipped": self.u_clipped,
                "a": self.a, "b": self.b, "c": self.c, "residuals": self.residuals,
                "min_eigenvalue": self.min_eigenvalue, "objective": self.objective,
                "feasible": self.feasible, "exact": self.exact,
                "ratios": {k: json_float(v) for k, v in self.ratios.items()},
                "lambda_k": self.lambda_k, "n": self.n, "k": self.k}


def _coefficients(n, k, eH, eG, lam_k, u_value=None):
    """Closed-form ``(u_raw, u, a, b, c)``; rational when the inputs are."""
    u_raw = -lam_k - 1 + (k * lam_k + k * k - 2 * eH) / (n * k * k)
    u = u_raw if u_value is None else u_value
    if u_value is None and u < 0:
        u = 0 * u
    a = (2 * eH + k * u + n * k * k - k * k) / (2 * k * eG * (n * k - 1))
    b = Fraction(1, 2 * eG) if isinstance(u, Fraction) else 1.0 / (2 * eG)
    c = (k * (k - 1) - 2 * eH - k * u) / (n * n * k * k - n * k)
    return u_raw, u, a, b, c


def _exact_sums(G, H, case, u):
    """Total sum and per-label trace of ``Y`` in exact rational arithmetic.

    ``u`` enters as the exact rational value of its double, so the identities
    are checked for the coefficients actually used.
    """
    n, k, eH, eG = G.n, H.n, H.m, G.m
    sum_deg = int(G.degrees.sum())   # = sum of D = sum of A_G
    sum_AH = 2 * eH
    if case == HIGH:
        uq = Fraction(u)
        _, _, a, b, c = _coefficients(n, k, eH, eG, Fraction(0), u_value=uq)
        total = a * sum_deg * k + b * sum_deg * (sum_AH + uq * k) + c * n * n * k * k
        trace = a * sum_deg + c * n
    else:
        b = Fraction(1, 2 * eG)
        # the Laplacian term sums to zero
        total = b * sum_deg * k * k
        trace = b * sum_deg
    return {"total_sum": str(total), "total_sum_ok": total == k * k,
            "label_trace": str(trace), "label_trace_ok": trace == 1}


def null_certificate(G: Graph, H: Graph, q0: float | None = None, branch: str | None = None,
                     tol: float = 1e-5, psd_tol: float = 1e-8, keep_matrix: bool = True) -> NullCertificate:
    """Assemble and verify the explicit relaxation point for ``(G, H)``.

    Args:
        G: observed graph with at least one edge.
        H: hidden graph with at least one edge.
        q0: null edge density for the reported regime ratios; defaults to
            the empirical density of ``G``.
        branch: force ``"lambda_k_high"`` or ``"lambda_k_low"`` instead of
            choosing by the eigenvalue rule.
        tol: bound on the linear and box residuals.
        psd_tol: allowed negative part of the smallest eigenvalue.
        keep_matrix: keep ``Y`` on the result.
    """
    check_graph(G, nonempty=True)
    check_graph(H, "H", nonempty=True)
    n, k, eH, eG = G.n, H.n, H.m, G.m
    if k > n:
        raise InvalidParameterError(f"v(H)={k} exceeds v(G)={n}")
    if q0 is None:
        q0 = eG / (n * (n - 1) / 2)
    q0 = check_probability(q0, low_open=True, high_open=True)
    AH = H.adjacency()
    wH = np.linalg.eigvalsh(AH)
    lam_1, lam_k = float(wH[-1]), float(wH[0])
    case = HIGH if lam_k >= (2 * eH - k * k) / k else LOW
    if branch is not None:
        if branch not in (HIGH, LOW):
            raise InvalidParameterError(f"unknown branch {branch!r}")
        case = branch
    AG = G.adjacency()
    D = np.diag(G.degrees.astype(float))
    I_k = np.eye(k)
    if case == HIGH:
        u_raw, u, a, b, c = _coefficients(n, k, eH, eG, lam_k)
        Y = a * np.kron(D, I_k) + b * np.kron(AG, AH + u * I_k) + c
    else:
        u_raw = u = a = c = 0.0
        b = 1.0 / (2 * eG)
        Y = b * np.kron(D - AG, I_k) + b * np.kron(AG, np.ones((k, k)))
    res = constraint_residuals(Y, n, k, psd=False)
    lam_min = min_eigenvalue(Y)
    res["psd"] = max(0.0, -lam_min)
    objective = sdp_objective(Y, AG, AH)
    linear_ok = all(v <= tol for key, v in res.items() if key != "psd")
    feasible = linear_ok and lam_min >= -psd_tol
    ratios = {"top_eigenvalue_ratio": lam_1 / math.sqrt(n) / (sigma(q0) / 4.0),
              "spread_ratio": 2 * (lam_1 - lam_k) * math.sqrt(1 - q0) / math.sqrt(n * q0)}
    return NullCertificate(case=case, u=float(u), u_raw=float(u_raw), u_clipped=bool(u_raw < 0),
                           a=float(a), b=float(b), c=float(c), residuals=res,
                           min_eigenvalue=lam_min, objective=objective, feasible=feasible,
                           exact=_exact_sums(G, H, case, u), ratios=ratios, lambda_k=lam_k,
                           n=n, k=k, Y=Y if keep_matrix else None)


@dataclass(frozen=True)
class LaplacianReport:
    """Spectrum summary of ``L = D - A`` against the dense random-graph prediction.

    ``ratio`` is ``lambda_2(L) / (n p - 2 sqrt(n p (1 - p)))``, with
    ``lambda_2`` the second-smallest eigenvalue.
    """

    n: int
    p: float
    min_eigenvalue: float
    lambda_2: float
    predicted: float
    ratio: float
    psd: bool
    kernel_exact: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "min_eigenvalue": self.min_eigenvalue,
                "lambda_2": self.lambda_2, "predicted": self.predicted,
                "ratio": json_float(self.ratio), "psd": self.psd, "kernel_exact": self.kernel_exact}


def laplacian_spectrum_check(G: Graph, p: float) -> LaplacianReport:
    """Check ``L >= 0`` and ``L 1 = 0`` (in integers) and compare ``lambda_2(L)`` with ``n p - 2 sqrt(n p (1-p))``."""
    check_graph(G)
    p = check_probability(p)
    n = G.n
    if n < 2:
        raise EmptyGraphError("need at least two vertices")
    A = G.adjacency().astype(np.int64)
    L = np.diag(A.sum(axis=1)) - A
    kernel_exact = bool(np.all(L @ np.ones(n, dtype=np.int64) == 0))
    w = np.linalg.eigvalsh(L.astype(float))
    predicted = n * p - 2 * math.sqrt(n * p * (1 - p))
    ratio = float(w[1]) / predicted if predicted != 0 else math.nan
    return LaplacianReport(n, p, float(w[0]), float(w[1]), predicted, ratio,
                           bool(w[0] >= -1e-9), kernel_exact)
