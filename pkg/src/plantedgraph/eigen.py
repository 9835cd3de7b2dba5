"""Symmetric eigen-solvers: leading pairs, extremes and leave-one-out leading vectors."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.sparse.linalg import eigsh

from ._rng import make_rng
from .exceptions import InvalidArgumentError, NoConvergenceError

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000
DENSE_CUTOFF = 200


@dataclass(frozen=True)
class EigenPair:
    """An eigenvalue with its unit eigenvector.

    Attributes:
        value: eigenvalue.
        vector: unit-norm eigenvector, first nonzero entry positive.
        residual: ``||M v - value v||_2``.
        iterations: solver iterations (0 for direct methods).
        converged: whether ``residual <= tol`` was reached.
        method: solver that produced the pair.
    """

    value: float
    vector: np.ndarray
    residual: float
    iterations: int = 0
    converged: bool = True
    method: str = "dense"


def _check_symmetric(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {M.shape}")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max(initial=0))):
        raise InvalidArgumentError("matrix is not symmetric")
    return M


def canonical_sign(v):
    """Flip ``v`` so that its first entry with magnitude above 1e-12 is positive."""
    v = np.asarray(v, dtype=float)
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _pair(M, lam, v, iterations, tol, method):
    v = canonical_sign(v / np.linalg.norm(v))
    res = float(np.linalg.norm(M @ v - lam * v))
    return EigenPair(float(lam), v, res, iterations, res <= tol, method)


def _power(M, tol, max_iter, seed):
    n = M.shape[0]
    # shift by a Gershgorin bound so the top eigenvalue dominates in magnitude
    shift = float(np.abs(M).sum(axis=1).max())
    x = make_rng(seed).standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = M @ x
        lam = float(x @ y)
        if np.linalg.norm(y - lam * x) <= tol:
            return _pair(M, lam, x, it, tol, "power")
        y += shift * x
        x = y / np.linalg.norm(y)
    pair = _pair(M, lam, x, max_iter, tol, "power")
    raise NoConvergenceError(f"power iteration stopped at residual {pair.residual:.3e}", result=pair)


def _lanczos(M, tol, max_iter, seed):
    n = M.shape[0]
    v0 = make_rng(seed).standard_normal(n)
    w, V = eigsh(M, k=1, which="LA", tol=0, maxiter=max_iter, v0=v0)
    return _pair(M, w[0], V[:, 0], 0, tol, "lanczos")


def _dense(M, tol):
    w, V = np.linalg.eigh(M)
    return _pair(M, w[-1], V[:, -1], 0, tol, "dense")


def top_eigenpair(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                  method: str = "auto", seed: int = 0) -> EigenPair:
    """Largest (algebraic) eigenvalue of a symmetric matrix with its eigenvector.

    Args:
        M: symmetric ``n x n`` array.
        tol: bound on ``||M v - lambda v||_2``.
        max_iter: iteration cap for the iterative methods.
        method: ``"power"`` (shifted power iteration, Rayleigh-quotient
            stopping), ``"lanczos"`` (ARPACK), ``"dense"`` (LAPACK) or
            ``"auto"`` (dense up to 200 rows, Lanczos above).
        seed: start-vector seed for the iterative methods.

    Raises:
        NoConvergenceError: residual above ``tol``; ``err.result`` holds the
            best pair found.
    """
    M = _check_symmetric(M)
    if M.shape[0] == 0:
        raise InvalidArgumentError("empty matrix")
    if method == "auto":
        method = "dense" if M.shape[0] <= DENSE_CUTOFF else "lanczos"
    if method == "power":
        pair = _power(M, tol, max_iter, seed)
    elif method == "lanczos":
        if M.shape[0] <= 2:
            pair = _dense(M, tol)
        else:
            pair = _lanczos(M, tol, max_iter, seed)
    elif method == "dense":
        pair = _dense(M, tol)
    else:
        raise InvalidArgumentError(f"unknown eigen method {method!r}")
    if not pair.converged:
        raise NoConvergenceError(f"{pair.method} residual {pair.residual:.3e} exceeds {tol:g}", result=pair)
    return pair


def bottom_eigenpair(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     method: str = "auto", seed: int = 0, top: EigenPair | None = None) -> EigenPair:
    """Smallest eigenvalue via the leading pair of ``c I - M`` with ``c = lambda_1 + 1``."""
    M = _check_symmetric(M)
    if top is None:
        top = top_eigenpair(M, tol, max_iter, method, seed)
    c = top.value + 1.0
    p = top_eigenpair(c * np.eye(M.shape[0]) - M, tol, max_iter, method, seed)
    return _pair(M, c - p.value, p.vector, p.iterations, tol, p.method)


def second_eigenpair(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     method: str = "auto", seed: int = 0, top: EigenPair | None = None,
                     bottom: EigenPair | None = None) -> EigenPair:
    """Second-largest eigenvalue by deflating the leading pair.

    The leading direction is pushed below the spectrum by subtracting
    ``(lambda_1 - lambda_n + 1) v v^T``.
    """
    M = _check_symmetric(M)
    if M.shape[0] < 2:
        raise InvalidArgumentError("second eigenvalue needs n >= 2")
    if top is None:
        top = top_eigenpair(M, tol, max_iter, method, seed)
    if bottom is None:
        bottom = bottom_eigenpair(M, tol, max_iter, method, seed, top=top)
    gap = top.value - bottom.value + 1.0
    D = M - gap * np.outer(top.vector, top.vector)
    p = top_eigenpair(D, tol, max_iter, method, seed)
    return _pair(M, p.value, p.vector, p.iterations, tol, p.method)


@dataclass(frozen=True)
class Extremes:
    """``lambda_1``, ``lambda_2`` and ``lambda_n`` with the leading vector."""

    lambda_1: float
    lambda_2: float
    lambda_n: float
    leading: np.ndarray


def extremes(M) -> Extremes:
    """Dense extreme eigenvalues; intended for small matrices such as ``A_H``."""
    M = _check_symmetric(M)
    w, V = np.linalg.eigh(M)
    l2 = float(w[-2]) if len(w) > 1 else float(w[-1])
    return Extremes(float(w[-1]), l2, float(w[0]), canonical_sign(V[:, -1]))


# ---------------------------------------------------------------- leave-one-out


@dataclass(frozen=True)
class LeaveOneOut:
    """Leading eigenpairs of every principal submatrix ``M[-i, -i]``.

    Attributes:
        values: ``values[i]`` is the top eigenvalue with row/column ``i`` removed.
        vectors: column ``i`` is the matching eigenvector, embedded in
            ``R^n`` with a zero at position ``i``.
        residuals: per-vertex residual norms.
        fallback: vertices solved by a direct eigendecomposition of the submatrix.
        failed: vertices whose residual stayed above tolerance.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    fallback: tuple
    failed: tuple
    method: str


def _residuals(M, X, mu):
    R = M @ X - X * mu
    np.fill_diagonal(R, 0.0)  # row i of column i is not part of the submatrix
    return np.linalg.norm(R, axis=0)


def _direct_loo(M, i):
    keep = np.r_[0:i, i + 1:M.shape[0]]
    w, V = np.linalg.eigh(M[np.ix_(keep, keep)])
    x = np.zeros(M.shape[0])
    x[keep] = V[:, -1]
    return float(w[-1]), x


def _secular(M, tol):
    n = M.shape[0]
    w, Q = np.linalg.eigh(M)
    W2 = Q * Q  # W2[i, j] = Q_ij^2
    scale = max(1.0, float(np.abs(w).max()))
    top_weight = W2[:, -1]
    degenerate = (w[-1] - w[-2]) <= 1e-10 * scale
    tiny = top_weight <= 1e-28
    lo = np.full(n, w[-2])
    hi = np.full(n, w[-1])
    # f(mu) = sum_j Q_ij^2 / (w_j - mu) increases on (w_{n-1}, w_n); bisect for its root
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = (W2 / (w[None, :] - mid[:, None])).sum(axis=1)
        pos = f > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(np.abs(hi), 1.0)):
            break
    mu = 0.5 * (lo + hi)
    mu = np.where(tiny, w[-1], mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = Q.T / (w[:, None] - mu[None, :])  # coef[j, i] = Q_ij / (w_j - mu_i)
    coef[:, tiny] = 0.0
    coef[-1, tiny] = 1.0
    X = Q @ coef
    X[np.arange(n), np.arange(n)] = 0.0
    norms = np.linalg.norm(X, axis=0)
    bad = ~np.isfinite(norms) | (norms == 0)
    X[:, ~bad] /= norms[~bad]
    res = np.full(n, np.inf)
    res[~bad] = _residuals(M, X[:, ~bad], mu[~bad])
    redo = np.flatnonzero(bad | (res > tol) | degenerate)
    return mu, X, res, redo


def _power_loo(M, tol, max_iter):
    n = M.shape[0]
    w, V = np.linalg.eigh(M) if n <= DENSE_CUTOFF else eigsh(M, k=1, which="LA", tol=0)
    v = V[:, -1]
    shift = float(np.abs(M).sum(axis=1).max())
    X = np.repeat(v[:, None], n, axis=1)
    idx = np.arange(n)
    X[idx, idx] = 0.0
    X /= np.linalg.norm(X, axis=0)
    active = np.arange(n)
    mu = np.zeros(n)
    res = np.full(n, np.inf)
    for _ in range(max_iter):
        Y = M @ X[:, active]
        Y[active, np.arange(active.size)] = 0.0
        lam = np.einsum("ij,ij->j", X[:, active], Y)
        r = np.linalg.norm(Y - X[:, active] * lam, axis=0)
        mu[active] = lam
        res[active] = r
        done = r <= tol
        Y += shift * X[:, active]
        Y /= np.linalg.norm(Y, axis=0)
        X[:, active[~done]] = Y[:, ~done]
        active = active[~done]
        if active.size == 0:
            break
    return mu, X, res, active


def leave_one_out_eigenvectors(M, tol: float = 1e-6, method: str = "secular",
                               max_iter: int = DEFAULT_MAX_ITER) -> LeaveOneOut:
    """Leading eigenpair of ``M`` with each row/column removed in turn.

    The ``"secular"`` route diagonalizes ``M`` once. The top eigenvalue of
    ``M[-i,-i]`` is the largest root ``mu`` of
    ``sum_j Q_ij^2 / (lambda_j - mu) = 0``, found by bisection, and its
    eigenvector is ``(M - mu I)^{-1} e_i`` with entry ``i`` dropped. Each
    result is checked against ``tol``; degenerate or inaccurate vertices are
    recomputed by a direct eigendecomposition of the submatrix.

    The ``"power"`` route runs shifted power iteration for all vertices at
    once, warm-started from the leading eigenvector of ``M``.
    """
    M = _check_symmetric(M)
    n = M.shape[0]
    if n < 2:
        raise InvalidArgumentError("leave-one-out needs n >= 2")
    if method == "secular":
        mu, X, res, redo = _secular(M, tol)
    elif method == "power":
        mu, X, res, redo = _power_loo(M, tol, max_iter)
    else:
        raise InvalidArgumentError(f"unknown leave-one-out method {method!r}")
    for i in redo.tolist():
        mu[i], X[:, i] = _direct_loo(M, i)
        res[i] = float(np.linalg.norm(np.delete(M @ X[:, i] - mu[i] * X[:, i], i)))
    failed = tuple(int(i) for i in np.flatnonzero(res > tol))
    for i in range(n):
        X[:, i] = canonical_sign(X[:, i])
    return LeaveOneOut(mu, X, res, tuple(int(i) for i in redo), failed, method)


def spectral_norm_ratio(lam: float, q0: float, n: int) -> float:
    """``lam / (sigma(q0) sqrt(n))``."""
    return lam / (math.sqrt(q0 / (1 - q0)) * math.sqrt(n))
