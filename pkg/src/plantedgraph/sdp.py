"""Semidefinite relaxation of the subgraph QAP, solved by ADMM, and the test built on it.

The feasible set is the intersection of the PSD cone with the polyhedron
``P`` = {``0 <= Y <= 1``, ``sum(Y) = k^2``, unit per-label diagonal traces,
per-vertex diagonal traces at most 1}. ADMM alternates an eigenvalue
projection onto the PSD cone with an exact projection onto ``P``; the
latter splits into the diagonal (a small transportation polytope) and the
off-diagonal entries (a box with a fixed total).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
import struct

import numpy as np

from .exceptions import InvalidArgumentError, InvalidParameterError
from .graphs import Graph
from .outcomes import TestOutcome
from .qap import constraint_residuals, sdp_objective
from .validation import check_graph

MAX_DIM = 2000


@dataclass(frozen=True)
class SdpParams:
    """ADMM settings.

    Attributes:
        rho: initial penalty.
        tol: bound on the primal and dual residual norms (Frobenius).
        max_iter: iteration cap.
        balance_every: iterations between penalty updates; the penalty is
            doubled or halved when one residual exceeds ten times the other.
        slack_rel: test slack as a fraction of ``2 e(H)``.
        route: ``"auto"`` tries the explicit null certificate before the
            solver; ``"solver"`` always runs ADMM.
    """

    rho: float = 1.0
    tol: float = 1e-5
    max_iter: int = 20_000
    balance_every: int = 10
    slack_rel: float = 1e-3
    route: str = "auto"

    def __post_init__(self):
        if not self.rho > 0 or not self.tol > 0 or self.max_iter < 1 or self.balance_every < 1:
            raise InvalidParameterError(f"invalid SDP parameters {self}")
        if self.slack_rel < 0:
            raise InvalidParameterError("slack_rel must be non-negative")
        if self.route not in ("auto", "solver"):
            raise InvalidParameterError(f"unknown route {self.route!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SdpSolution:
    """Final ADMM iterate and its diagnostics.

    ``Y`` is the iterate projected onto the polyhedral constraints, so the
    box, sum and trace residuals sit at rounding level and ``residuals["psd"]``
    carries the remaining infeasibility.
    """

    Y: np.ndarray
    objective: float
    residuals: dict
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    rho: float
    history: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {"objective": self.objective, "residuals": self.residuals,
                "iterations": self.iterations, "converged": self.converged,
                "primal_residual": self.primal_residual, "dual_residual": self.dual_residual,
                "rho": self.rho}


# ------------------------------------------------------------- projections


def _solve_shift(B, target, axis):
    """Per line along ``axis``, the ``s`` with ``sum clip(B - s, 0, 1) = target``.

    The sum is piecewise linear and non-increasing in ``s`` with breakpoints
    at ``B`` and ``B - 1``; the root is found exactly between two of them.
    """
    L = B.T if axis == 0 else B  # one line per row of L
    P = np.sort(np.concatenate([L, L - 1.0], axis=1), axis=1)
    F = np.clip(L[:, None, :] - P[:, :, None], 0.0, 1.0).sum(axis=2)
    # first breakpoint where the sum has dropped to the target
    t = np.argmax(F <= target, axis=1)
    t = np.maximum(t, 1)
    rows = np.arange(L.shape[0])
    p0, p1 = P[rows, t - 1], P[rows, t]
    f0, f1 = F[rows, t - 1], F[rows, t]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(f0 > f1, p0 + (f0 - target) * (p1 - p0) / (f0 - f1), p1)
    return s


class _DiagonalProjector:
    """Euclidean projection of an ``n x k`` array onto {box, column sums 1, row sums <= 1}.

    Dual block-coordinate ascent: the projection is ``clip(D0 - alpha_i - beta_j, 0, 1)``
    with free ``alpha`` (equalities) and ``beta >= 0`` (inequalities); each
    block is maximized exactly. Multipliers are kept between calls.
    """

    def __init__(self, n, k, tol=1e-13, max_sweeps=2000):
        self.alpha = np.zeros(k)
        self.beta = np.zeros(n)
        self.tol = tol
        self.max_sweeps = max_sweeps

    def __call__(self, D0):
        beta = self.beta
        for _ in range(self.max_sweeps):
            alpha = _solve_shift(D0 - beta[:, None], 1.0, axis=0)
            R = D0 - alpha[None, :]
            free = np.clip(R, 0.0, 1.0).sum(axis=1)
            beta = np.zeros_like(beta)
            over = free > 1.0
            if over.any():
                beta[over] = np.maximum(_solve_shift(R[over], 1.0, axis=1), 0.0)
            D = np.clip(D0 - alpha[None, :] - beta[:, None], 0.0, 1.0)
            col_err = np.abs(D.sum(axis=0) - 1.0).max()
            row_err = max(0.0, (D.sum(axis=1) - 1.0).max())
            if col_err <= self.tol and row_err <= self.tol:
                break
        self.alpha, self.beta = alpha, beta
        return D


def _project_offdiagonal(W, total):
    """``clip(W - tau, 0, 1)`` on off-diagonal entries with the shift ``tau`` fixing their sum."""
    mask = ~np.eye(W.shape[0], dtype=bool)
    w = W[mask]
    if total <= 0:
        return np.zeros_like(w), mask
    lo, hi = w.min() - 1.0, w.max()  # f(lo) = count >= total, f(hi) = 0
    tau = 0.5 * (lo + hi)
    for _ in range(200):
        v = w - tau
        f = np.clip(v, 0.0, 1.0).sum() - total
        if abs(f) <= 1e-12 * max(1.0, total):
            break
        if f > 0:
            lo = tau
        else:
            hi = tau
        slope = np.count_nonzero((v > 0) & (v < 1))
        step = tau + f / slope if slope else None
        # Newton on the piecewise-linear sum, falling back to bisection
        tau = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
    return np.clip(w - tau, 0.0, 1.0), mask


def _project_polyhedron(W, n, k, diag_proj):
    Z = np.empty_like(W)
    vals, mask = _project_offdiagonal(W, k * k - k)
    Z[mask] = vals
    d = diag_proj(np.diagonal(W).reshape(n, k))
    Z[np.diag_indices_from(Z)] = d.ravel()
    return Z


def _project_psd(W):
    w, V = np.linalg.eigh(W)
    pos = w > 0
    X = (V[:, pos] * w[pos]) @ V[:, pos].T
    return 0.5 * (X + X.T)


def cost_matrix(AG, AH) -> np.ndarray:
    """Dense ``A_G kron A_H`` for the ADMM update, in the row-major ``(j, i)`` indexing."""
    n, k = AG.shape[0], AH.shape[0]
    return (AG[:, None, :, None] * AH[None, :, None, :]).reshape(n * k, n * k)


def sdp_solve(G: Graph, H: Graph, params: SdpParams | None = None,
              record_history: bool = False) -> SdpSolution:
    """Maximize ``Tr((A_G kron A_H) Y)`` over the relaxation by ADMM.

    Iteration (scaled form, penalty ``rho``)::

        X = proj_psd(Z - U + C / rho)
        Z = proj_P(X + U)
        U = U + X - Z

    stopping when ``||X - Z||_F`` and ``rho ||Z - Z_prev||_F`` are both at
    most ``params.tol``. The result is deterministic for fixed inputs.
    """
    params = params or SdpParams()
    check_graph(G)
    check_graph(H, "H")
    n, k = G.n, H.n
    if k > n:
        raise InvalidArgumentError(f"v(H)={k} exceeds v(G)={n}")
    if n * k > MAX_DIM:
        raise InvalidArgumentError(f"nk={n * k} exceeds the dense limit {MAX_DIM}")
    AG, AH = G.adjacency(), H.adjacency()
    C = cost_matrix(AG, AH)
    diag_proj = _DiagonalProjector(n, k)
    N = n * k
    Z = _project_polyhedron(np.zeros((N, N)), n, k, diag_proj)
    U = np.zeros((N, N))
    rho = params.rho
    r = s = np.inf
    history = []
    converged = False
    it = 0
    for it in range(1, params.max_iter + 1):
        X = _project_psd(Z - U + C / rho)
        Z_prev = Z
        Z = _project_polyhedron(X + U, n, k, diag_proj)
        U += X - Z
        r = float(np.linalg.norm(X - Z))
        s = float(rho * np.linalg.norm(Z - Z_prev))
        if record_history:
            history.append((r, s, rho))
        if r <= params.tol and s <= params.tol:
            converged = True
            break
        if it % params.balance_every == 0:
            if r > 10 * s:
                rho *= 2.0
                U /= 2.0
            elif s > 10 * r:
                rho /= 2.0
                U *= 2.0
    res = constraint_residuals(Z, n, k)
    converged = converged and all(v <= params.tol for v in res.values())
    return SdpSolution(Z, sdp_objective(Z, AG, AH), res, it, converged, r, s, rho, tuple(history))


def sdp_test(G: Graph, H: Graph, params: SdpParams | None = None) -> TestOutcome:
    """Reject the null when the relaxation value reaches ``2 e(H) - slack``.

    With ``route="auto"`` the explicit null certificate is tried first: a
    feasible matrix with objective at least ``2 e(H)`` proves the relaxation
    value is that large, so the decision is settled without ADMM. Otherwise
    ADMM runs and its objective is compared with the threshold.
    """
    from .certificate import null_certificate

    params = params or SdpParams()
    check_graph(G)
    check_graph(H, "H", nonempty=True)
    thr = 2.0 * H.m
    slack = params.slack_rel * thr
    if params.route == "auto" and G.m > 0 and G.n * H.n <= MAX_DIM:
        cert = null_certificate(G, H, tol=params.tol)
        if cert.feasible and cert.objective >= thr - slack:
            meta = {"rule": "statistic >= threshold - slack", "route": "certificate",
                    "value_kind": "lower_bound", "slack": slack, "case": cert.case,
                    "residuals": cert.residuals, "iterations": 0}
            return TestOutcome("sdp", cert.objective, thr, 1, meta)
    sol = sdp_solve(G, H, params)
    meta = {"rule": "statistic >= threshold - slack", "route": "solver",
            "value_kind": "approximate_optimum", "slack": slack,
            "residuals": sol.residuals, "iterations": sol.iterations,
            "converged": sol.converged}
    return TestOutcome("sdp", sol.objective, thr, int(sol.objective >= thr - slack), meta,
                       reliable=sol.converged)


# ---------------------------------------------------------------- Y dump

MAGIC = b"PGSDPY01"


def dump_matrix(Y, n: int, k: int, path) -> None:
    """Write ``Y`` as a 16-byte header (magic, uint32 n, uint32 k) plus row-major float64."""
    Y = np.ascontiguousarray(Y, dtype="<f8")
    if Y.shape != (n * k, n * k):
        raise InvalidArgumentError(f"Y has shape {Y.shape}, expected {(n * k, n * k)}")
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<II", n, k))
        fh.write(Y.tobytes())


def load_matrix(path):
    """Read a matrix written by :func:`dump_matrix`; returns ``(Y, n, k)``."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:8] != MAGIC:
            raise InvalidArgumentError(f"{path} is not a matrix dump")
        n, k = struct.unpack("<II", head[8:])
        Y = np.frombuffer(fh.read(), dtype="<f8")
    if Y.size != (n * k) ** 2:
        raise InvalidArgumentError(f"{path} is truncated")
    return Y.reshape(n * k, n * k).copy(), n, k
