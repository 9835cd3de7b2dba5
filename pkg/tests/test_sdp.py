from fractions import Fraction
import math
import random

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plantedgraph.certificate import HIGH, LOW, laplacian_spectrum_check, null_certificate
from plantedgraph.exceptions import (BudgetExceededError, InvalidArgumentError,
                                     InvalidEmbeddingError, InvalidParameterError)
from plantedgraph.graphs import Graph, clique, cycle, er_sample, path, plant, star
from plantedgraph.qap import (constraint_residuals, kron_apply, lift_assignment, min_eigenvalue,
                              qap_brute_force, qap_objective, sdp_objective)
from plantedgraph.sdp import (MAX_DIM, SdpParams, _DiagonalProjector, _project_polyhedron,
                              cost_matrix, dump_matrix, load_matrix, sdp_solve, sdp_test)

from oracles import brute_qap


def random_graph(rng, n, p):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])


def clarabel_value(G, H):
    """Reference optimum of the relaxation from an interior-point solver."""
    n, k = G.n, H.n
    N = n * k
    C = np.kron(G.adjacency(), H.adjacency())
    Y = cp.Variable((N, N), PSD=True)
    d = cp.reshape(cp.diag(Y), (n, k), order="C")
    cons = [Y >= 0, Y <= 1, cp.sum(Y) == k * k, cp.sum(d, axis=0) == 1, cp.sum(d, axis=1) <= 1]
    prob = cp.Problem(cp.Maximize(cp.trace(C @ Y)), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


# ------------------------------------------------------------------ QAP

def test_qap_examples():
    assert qap_objective(clique(3), clique(3), [0, 1, 2]) == 6
    assert qap_objective(Graph(4), clique(2), [0, 3]) == 0
    assert qap_brute_force(cycle(4), clique(3))[0] == 4


def test_qap_forms_agree():
    rng = random.Random(2)
    for _ in range(100):
        G = random_graph(rng, 9, 0.5)
        H = random_graph(rng, rng.randint(2, 5), 0.6)
        phi = rng.sample(range(9), H.n)
        a, b = qap_objective(G, H, phi), qap_objective(G, H, phi, form="trace")
        assert a == b and a % 2 == 0 and 0 <= a <= 2 * H.m


def test_qap_brute_force_against_enumeration():
    rng = random.Random(4)
    for _ in range(30):
        G = random_graph(rng, rng.randint(4, 7), rng.uniform(0.2, 0.8))
        H = random_graph(rng, rng.randint(2, 4), 0.7)
        opt, phi = qap_brute_force(G, H)
        assert opt == brute_qap(G, H)
        assert qap_objective(G, H, phi) == opt


def test_qap_planted_and_single_edge():
    H = cycle(5)
    inst = plant(9, 0.0, H, seed=1)
    assert qap_brute_force(inst.graph, H)[0] == 2 * H.m
    assert qap_brute_force(Graph(5), clique(2))[0] == 0
    assert qap_brute_force(Graph(5, [(1, 3)]), clique(2))[0] == 2


def test_qap_errors():
    with pytest.raises(InvalidEmbeddingError):
        qap_objective(clique(4), clique(3), [0, 0, 1])
    with pytest.raises(BudgetExceededError):
        qap_brute_force(er_sample(12, 0.3, seed=1), clique(5), budget=50)


# ------------------------------------------------------------------ lifts

def test_lift_single_vertex():
    Y = lift_assignment([0], 2, 1)
    assert np.array_equal(Y, np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert Y.sum() == 1


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_lift_consistency(seed):
    rng = random.Random(seed)
    n, k = rng.randint(2, 7), None
    k = rng.randint(1, min(4, n))
    G, H = random_graph(rng, n, 0.5), random_graph(rng, k, 0.6)
    phi = rng.sample(range(n), k)
    Y = lift_assignment(phi, n, k)
    res = constraint_residuals(Y, n, k)
    assert all(v == 0 for key, v in res.items() if key != "psd") and res["psd"] < 1e-12
    d = np.diagonal(Y).reshape(n, k)
    assert np.all(d.sum(axis=0) == 1)
    assert np.linalg.matrix_rank(Y) == 1
    assert sdp_objective(Y, G.adjacency(), H.adjacency()) == qap_objective(G, H, phi)


def test_kron_apply_matches_dense():
    rng = np.random.default_rng(0)
    AG, AH = er_sample(6, 0.5, seed=1).adjacency(), cycle(4).adjacency()
    Y = rng.normal(size=(24, 24))
    assert np.allclose(kron_apply(AG, AH, Y), np.kron(AG, AH) @ Y)
    assert np.array_equal(cost_matrix(AG, AH), np.kron(AG, AH))


# ------------------------------------------------------------------ projections

def test_polyhedron_projection_matches_cvxpy():
    n, k = 5, 3
    N = n * k
    rng = np.random.default_rng(3)
    W = rng.normal(0.3, 0.6, size=(N, N))
    W = 0.5 * (W + W.T)
    Z = _project_polyhedron(W, n, k, _DiagonalProjector(n, k))
    X = cp.Variable((N, N), symmetric=True)
    d = cp.reshape(cp.diag(X), (n, k), order="C")
    prob = cp.Problem(cp.Minimize(cp.sum_squares(X - W)),
                      [X >= 0, X <= 1, cp.sum(X) == k * k, cp.sum(d, axis=0) == 1, cp.sum(d, axis=1) <= 1])
    prob.solve(solver=cp.CLARABEL)
    assert np.abs(Z - X.value).max() < 1e-6
    res = constraint_residuals(Z, n, k, psd=False)
    assert max(res.values()) < 1e-10


# ------------------------------------------------------------------ solver

def test_sdp_complete_host():
    sol = sdp_solve(clique(6), clique(3))
    assert sol.converged
    assert 6 - 1e-4 <= sol.objective <= 6 * 1.05


def test_sdp_empty_host():
    sol = sdp_solve(Graph(6), clique(3))
    assert abs(sol.objective) < 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_sdp_matches_interior_point(seed):
    rng = random.Random(seed)
    G = random_graph(rng, rng.randint(5, 7), 0.5)
    H = random_graph(rng, 3, 0.8)
    sol = sdp_solve(G, H)
    ref = clarabel_value(G, H)
    assert sol.converged
    assert abs(sol.objective - ref) <= 1e-3 * max(1.0, abs(ref))
    assert sol.objective >= brute_qap(G, H) - 1e-4


def test_sdp_solution_contract():
    G, H = er_sample(7, 0.5, seed=3), path(3)
    sol = sdp_solve(G, H, record_history=True)
    assert all(v >= 0 for v in sol.residuals.values())
    if sol.converged:
        assert all(v <= 1e-5 for v in sol.residuals.values())
    assert len(sol.history) == sol.iterations
    again = sdp_solve(G, H)
    assert np.array_equal(sol.Y, again.Y)


def test_sdp_relabeling_invariance():
    G, H = er_sample(7, 0.5, seed=8), path(3)
    perm = np.random.default_rng(1).permutation(7)
    a, b = sdp_solve(G, H).objective, sdp_solve(G.relabel(perm), H).objective
    assert abs(a - b) < 1e-3


def test_sdp_no_convergence_flagged():
    sol = sdp_solve(er_sample(7, 0.5, seed=3), path(3), SdpParams(max_iter=3))
    assert not sol.converged and sol.iterations == 3


def test_sdp_limits_and_params():
    with pytest.raises(InvalidArgumentError):
        sdp_solve(er_sample(700, 0.1, seed=1), clique(3))
    assert 700 * 3 > MAX_DIM
    with pytest.raises(InvalidParameterError):
        SdpParams(route="other")
    with pytest.raises(InvalidParameterError):
        SdpParams(rho=0)


# ------------------------------------------------------------------ test

def test_sdp_test_planted_noiseless():
    H = cycle(4)
    inst = plant(6, 0.0, H, seed=2)
    out = sdp_test(inst.graph, H, SdpParams(route="solver"))
    assert out.decision == 1 and out.metadata["route"] == "solver"


def test_sdp_test_single_edge():
    out = sdp_test(Graph(5, [(0, 4)]), clique(2), SdpParams(route="solver"))
    assert out.decision == 1
    assert math.isclose(out.metadata["slack"], 1e-3 * 2)


def test_sdp_test_null_path_fires():
    G = er_sample(300, 0.5, seed=0)
    out = sdp_test(G, path(5))
    assert out.decision == 1 and out.metadata["route"] == "certificate"
    assert out.metadata["value_kind"] == "lower_bound"


def test_sdp_test_empty_host_rejects_nothing():
    assert sdp_test(Graph(5), clique(3)).decision == 0


# ------------------------------------------------------------------ certificate

def test_certificate_path_feasible():
    G = er_sample(300, 0.5, seed=1)
    c = null_certificate(G, path(5), q0=0.5)
    assert c.case == HIGH and c.feasible
    assert c.objective >= 8 and c.min_eigenvalue >= -1e-8
    assert c.exact["total_sum_ok"] and c.exact["label_trace_ok"]
    assert c.b == 1 / (2 * G.m)
    assert math.isclose(c.Y.sum(), 25, rel_tol=1e-12)


def test_certificate_coefficients_closed_form():
    G, H = er_sample(60, 0.5, seed=2), path(4)
    n, k, eH, eG = 60, 4, 3, G.m
    lam_k = float(np.linalg.eigvalsh(H.adjacency())[0])
    c = null_certificate(G, H)
    u = max(0.0, -lam_k - 1 + (k * lam_k + k * k - 2 * eH) / (n * k * k))
    assert math.isclose(c.u, u, abs_tol=1e-15)
    assert math.isclose(c.a, (2 * eH + k * u + n * k * k - k * k) / (2 * k * eG * (n * k - 1)))
    assert math.isclose(c.c, (k * (k - 1) - 2 * eH - k * u) / (n * n * k * k - n * k))


def test_certificate_low_branch():
    G = er_sample(40, 0.5, seed=3)
    c = null_certificate(G, star(5), branch=LOW)
    assert c.case == LOW and c.b == 1 / (2 * G.m)
    d = np.diagonal(c.Y).reshape(40, 5)
    assert np.allclose(d.sum(axis=0), 1, atol=1e-14)
    assert c.exact["label_trace"] == "1" and c.exact["total_sum"] == "25"
    assert c.residuals["row_traces"] < 1e-12


def test_certificate_branch_rule():
    G = er_sample(40, 0.8, seed=1)
    for H in (star(30), path(6), clique(5), cycle(7), er_sample(8, 0.4, seed=2)):
        if H.m == 0:
            continue
        lam_k = np.linalg.eigvalsh(H.adjacency())[0]
        expected = HIGH if lam_k >= (2 * H.m - H.n ** 2) / H.n else LOW
        assert null_certificate(G, H).case == expected


def test_certificate_exact_identities_any_case():
    rng = random.Random(5)
    for _ in range(5):
        G = random_graph(rng, 20, 0.5)
        H = random_graph(rng, 4, 0.8)
        if H.m == 0 or G.m == 0:
            continue
        c = null_certificate(G, H)
        assert Fraction(c.exact["total_sum"]) == 16 and Fraction(c.exact["label_trace"]) == 1


def test_certificate_errors():
    with pytest.raises(InvalidArgumentError):
        null_certificate(Graph(5), path(3))
    with pytest.raises(InvalidParameterError):
        null_certificate(clique(5), path(3), branch="middle")


# ------------------------------------------------------------------ Laplacian

def test_laplacian_checks():
    r = laplacian_spectrum_check(er_sample(200, 0.3, seed=1), 0.3)
    assert r.kernel_exact and r.psd
    assert math.isclose(laplacian_spectrum_check(clique(12), 0.5).lambda_2, 12, rel_tol=1e-12)


def test_laplacian_tracks_minimum_degree():
    n, p = 1000, 0.3
    ratios = []
    for s in range(10):
        G = er_sample(n, p, seed=s)
        r = laplacian_spectrum_check(G, p)
        # Fiedler: lambda_2 <= n/(n-1) * minimum degree
        assert r.lambda_2 <= n / (n - 1) * G.degrees.min() + 1e-9
        assert r.kernel_exact and r.psd
        ratios.append(r.ratio)
    # finite-n location: np - sqrt(2 ln n np(1-p)) over np - 2 sqrt(np(1-p))
    s_ = math.sqrt(n * p * (1 - p))
    expected = (n * p - math.sqrt(2 * math.log(n)) * s_) / (n * p - 2 * s_)
    assert abs(np.mean(ratios) - expected) < 0.03


# ------------------------------------------------------------------ dump format

def test_matrix_dump_round_trip(tmp_path):
    Y = np.random.default_rng(0).normal(size=(12, 12))
    dump_matrix(Y, 4, 3, tmp_path / "y.bin")
    raw = (tmp_path / "y.bin").read_bytes()
    assert raw[:8] == b"PGSDPY01" and len(raw) == 16 + 8 * 144
    Z, n, k = load_matrix(tmp_path / "y.bin")
    assert (n, k) == (4, 3) and np.array_equal(Y, Z)
    (tmp_path / "bad.bin").write_bytes(b"nonsense")
    with pytest.raises(InvalidArgumentError):
        load_matrix(tmp_path / "bad.bin")
    with pytest.raises(InvalidArgumentError):
        dump_matrix(Y, 5, 3, tmp_path / "z.bin")


def test_min_eigenvalue():
    assert math.isclose(min_eigenvalue(np.diag([3.0, -2.0])), -2.0)
