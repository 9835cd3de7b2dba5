"""Independent reference implementations used only by the tests.

Each oracle shares no code with the package: plain enumeration, a cyclic
Jacobi eigen-solver, arbitrary-precision formula evaluation.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
import math

import mpmath
import numpy as np


def edge_set(G):
    return {(int(i), int(j)) for i, j in G.edges.tolist()}


def adjacent(E, a, b):
    return (min(a, b), max(a, b)) in E


def brute_count(H, G):
    """Injective edge-preserving maps by trying every ordered tuple of host vertices."""
    EH, EG = list(edge_set(H)), edge_set(G)
    return sum(all(adjacent(EG, phi[i], phi[j]) for i, j in EH)
               for phi in permutations(range(G.n), H.n))


def brute_density(H):
    """``(max e(F)/v(F), smallest maximizer size)`` over every vertex subset."""
    E = edge_set(H)
    best, size = Fraction(0), None
    for r in range(1, H.n + 1):
        for S in combinations(range(H.n), r):
            s = set(S)
            val = Fraction(sum(i in s and j in s for i, j in E), r)
            if val > best:
                best, size = val, r
    return best, size


def brute_profile(H, u):
    E = edge_set(H)
    return max(sum(i in s and j in s for i, j in E) for s in map(set, combinations(range(H.n), u)))


def brute_qap(G, H):
    """Maximum of ``2 * sum_{E(H)} A_G(phi(i), phi(j))`` over all injective maps."""
    EH, EG = list(edge_set(H)), edge_set(G)
    return max(2 * sum(adjacent(EG, phi[i], phi[j]) for i, j in EH)
               for phi in permutations(range(G.n), H.n))


def jacobi_eigh(A, sweeps=60, tol=1e-14):
    """Cyclic Jacobi rotations; returns ascending eigenvalues and column eigenvectors."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(1.0, float(np.abs(A).max()))
    for _ in range(sweeps):
        if np.abs(A - np.diag(np.diag(A))).max() < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                # A <- R^T A R with R the (p, q) plane rotation
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * Ap - s * Aq, s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * Ap - s * Aq, s * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * Vp - s * Vq, s * Vp + c * Vq
    w = np.diag(A)
    order = np.argsort(w)
    return w[order], V[:, order]


def brute_delta_bar(H, n, q0, chunk=200):
    """Sum of ``q0^{|E1 u E2|}`` over ordered labeling pairs sharing at least two vertices.

    Every labeling of ``H`` into ``[n]`` is enumerated; the pair sum is
    vectorized in row chunks.
    """
    labs = np.array(list(permutations(range(n), H.n)), dtype=np.int64)
    e = H.edges
    a, b = labs[:, e[:, 0]], labs[:, e[:, 1]]
    codes = np.minimum(a, b) * n + np.maximum(a, b)      # (L, m) image edges
    total = 0.0
    logq = math.log(q0)
    m = H.m
    for lo in range(0, len(labs), chunk):
        V1, C1 = labs[lo:lo + chunk], codes[lo:lo + chunk]
        shared_v = (V1[:, None, :, None] == labs[None, :, None, :]).sum(axis=(2, 3))
        shared_e = (C1[:, None, :, None] == codes[None, :, None, :]).sum(axis=(2, 3))
        mask = shared_v >= 2
        total += float(np.exp((2 * m - shared_e[mask]) * logq).sum())
    return total


def g_mp(u, k, n, e_u, e, q0):
    """The Stirling-bound term evaluated directly in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    k, n, u = mpmath.mpf(k), mpmath.mpf(n), mpmath.mpf(u)
    q = mpmath.mpf(q0)
    E = mpmath.e
    if u < k:
        num = (2 * mpmath.pi) ** mpmath.mpf(-1.5) * E ** (-2 * k + 2) * k ** (2 * k + 1)
        den = ((n - u) ** u * (k - u) ** (2 * (k - u) + 1) * E ** (-2 * (k - u) - u)
               * u ** (u + mpmath.mpf(0.5)))
        return num / den * q ** (-e_u)
    num = (k ** (k + mpmath.mpf(0.5)) * E ** (-k + 1) * (n - k) ** (n - k + mpmath.mpf(0.5))
           * E ** (-n + k + 1))
    den = mpmath.sqrt(2 * mpmath.pi) * n ** (n + mpmath.mpf(0.5)) * E ** (-n)
    return num / den * q ** (-e)
