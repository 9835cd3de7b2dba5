import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plantedgraph.exceptions import (InvalidArgumentError, InvalidEmbeddingError,
                                     InvalidParameterError, SubgraphTooLargeError)
from plantedgraph.graphs import (Embedding, Graph, PlantedInstance, build_family, clique,
                                 clique_with_pendant, cycle, cycle_power, er_sample, from_edgelist,
                                 from_json, hypercube, path, plant, read_graph, regular_tree,
                                 shifted_adjacency, sigma, star, to_edgelist, to_json, write_graph)
from plantedgraph._rng import make_rng


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph(n, chosen)


# ------------------------------------------------------------------ Graph

def test_graph_normalizes_edges():
    G = Graph(4, [(2, 1), (1, 2), (0, 3)])
    assert G.edges.tolist() == [[0, 3], [1, 2]]
    assert G.m == 2


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 4)], [(-1, 2)]])
def test_graph_rejects_bad_edges(edges):
    with pytest.raises(InvalidArgumentError):
        Graph(4, edges)


@pytest.mark.parametrize("n", [0, -1, 2.5, True])
def test_graph_rejects_bad_n(n):
    with pytest.raises(InvalidArgumentError):
        Graph(n)


@given(graphs())
def test_adjacency_invariants(G):
    A = G.adjacency()
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 0)
    assert A.sum() == 2 * G.m
    assert Graph.from_adjacency(A) == G
    assert np.array_equal(G.degrees, A.sum(axis=1))


@given(graphs())
def test_serialization_round_trip(G):
    assert from_edgelist(to_edgelist(G)) == G
    assert from_json(to_json(G)) == G
    assert to_edgelist(from_edgelist(to_edgelist(G))) == to_edgelist(G)


def test_file_round_trip(tmp_path):
    G = er_sample(30, 0.3, seed=5)
    for name in ("g.txt", "g.json"):
        write_graph(G, tmp_path / name)
        assert read_graph(tmp_path / name) == G


def test_edgelist_format_is_one_based():
    assert to_edgelist(Graph(3, [(0, 2)])) == "3 1\n1 3\n"
    with pytest.raises(InvalidArgumentError):
        from_edgelist("3 2\n1 2\n")


@given(graphs(), st.randoms(use_true_random=False))
def test_relabel_preserves_degree_multiset(G, rnd):
    perm = list(range(G.n))
    rnd.shuffle(perm)
    R = G.relabel(perm)
    assert R.m == G.m
    assert sorted(R.degrees) == sorted(G.degrees)
    assert all(R.has_edge(perm[i], perm[j]) for i, j in G.edges.tolist())


def test_induced_and_delete():
    K = clique(5)
    assert K.delete_vertex(2) == clique(4)
    assert K.induced_subgraph([4, 0, 2]).m == 3


# ------------------------------------------------------------------ sampling

def test_er_trivial_probabilities():
    assert er_sample(5, 0.0, seed=7).m == 0
    assert er_sample(5, 1.0, seed=7) == clique(5)


def test_er_mean_edge_count():
    n, N = 1000, 1000 * 999 // 2
    counts = [er_sample(n, 0.5, seed=s).m for s in range(200)]
    assert abs(np.mean(counts) - N / 2) <= 3 * math.sqrt(N * 0.25)


def test_er_edge_indicator_mean():
    # 20 graphs on 200 vertices give ~4e5 pair indicators
    q0, n = 0.3, 200
    pairs = 20 * n * (n - 1) // 2
    hits = sum(er_sample(n, q0, seed=s).m for s in range(20))
    se = math.sqrt(q0 * (1 - q0) / pairs)
    assert abs(hits / pairs - q0) <= 4 * se


def test_er_reproducible_and_streams_differ():
    assert er_sample(300, 0.2, seed=3) == er_sample(300, 0.2, seed=3)
    assert er_sample(300, 0.2, seed=3, stream=(1,)) != er_sample(300, 0.2, seed=3, stream=(2,))


@pytest.mark.parametrize("q0", [-0.1, 1.5, float("nan")])
def test_er_rejects_bad_probability(q0):
    with pytest.raises(InvalidArgumentError):
        er_sample(5, q0)


def test_rng_streams_unique():
    states = {make_rng(0, i, h).random() for i in range(5000) for h in (0, 1)}
    assert len(states) == 10_000


def test_plant_noiseless_triangle():
    inst = plant(3, 0.0, clique(3), seed=1)
    assert inst.graph == clique(3)


def test_plant_contains_image_always():
    H = cycle(6)
    for s in range(1000):
        inst = plant(15, 0.2, H, seed=s)
        assert all(inst.graph.has_edge(i, j) for i, j in inst.hidden.image_edges().tolist())


def test_plant_mean_edges():
    n, N = 500, 500 * 499 // 2
    counts = [plant(n, 0.2, clique(10), seed=s).graph.m for s in range(200)]
    mean = 45 + (N - 45) * 0.2
    assert abs(np.mean(counts) - mean) <= 3 * math.sqrt((N - 45) * 0.16)


def test_plant_labeling_uniform():
    # each vertex should host vertex 0 of H about equally often
    hits = np.bincount([plant(6, 0.5, clique(2), seed=s).hidden.targets[0] for s in range(6000)],
                       minlength=6)
    assert np.all(np.abs(hits - 1000) < 5 * math.sqrt(1000 * 5 / 6))


def test_plant_deterministic_and_serializable():
    a = plant(40, 0.3, cycle_power(8, 2), seed=11)
    assert a == plant(40, 0.3, cycle_power(8, 2), seed=11)
    assert PlantedInstance.from_dict(json.loads(json.dumps(a.to_dict()))) == a


def test_plant_errors():
    with pytest.raises(SubgraphTooLargeError):
        plant(3, 0.5, clique(4))
    with pytest.raises(InvalidArgumentError):
        plant(5, 0.5, Graph(3))


def test_embedding_validation():
    H = clique(3)
    with pytest.raises(InvalidEmbeddingError):
        Embedding(H, [0, 0, 1], 5)
    with pytest.raises(InvalidEmbeddingError):
        Embedding(H, [0, 1, 5], 5)
    with pytest.raises(InvalidEmbeddingError):
        Embedding(H, [0, 1], 5)


# ------------------------------------------------------------------ families

def test_hypercube_regular():
    Q = hypercube(3)
    assert Q.n == 8 and set(Q.degrees) == {3}


def test_regular_tree_counts():
    T = regular_tree(3, 2)
    assert (T.n, T.m) == (10, 9)


@pytest.mark.parametrize("d,r", [(3, 1), (3, 4), (4, 3), (5, 2)])
def test_regular_tree_closed_form(d, r):
    T = regular_tree(d, r)
    assert T.n == 1 + d * ((d - 1) ** r - 1) // (d - 2)
    assert T.m == T.n - 1


def test_cycle_power_counts_and_circulant():
    C = cycle_power(10, 2)
    assert set(C.degrees) == {4} and C.m == 20
    A = C.adjacency()
    for i in range(9):
        assert np.array_equal(A[i + 1], np.roll(A[i], 1))


@pytest.mark.parametrize("ctor,args", [(clique, (1,)), (hypercube, (0,)), (regular_tree, (2, 3)),
                                       (regular_tree, (3, 0)), (cycle_power, (4, 2))])
def test_family_parameter_errors(ctor, args):
    with pytest.raises(InvalidParameterError):
        ctor(*args)


def test_misc_families_and_builder():
    assert path(5).m == 4 and star(6).degrees.max() == 5 and cycle(7).m == 7
    P = clique_with_pendant(5)
    assert P.n == 5 and sorted(P.degrees)[0] == 1
    assert build_family("tree", d=3, r=2) == regular_tree(3, 2)
    with pytest.raises(InvalidParameterError):
        build_family("clique")
    with pytest.raises(InvalidParameterError):
        build_family("nope", k=3)


# ------------------------------------------------------------------ shifted adjacency

def test_shifted_adjacency_examples():
    assert np.array_equal(shifted_adjacency(clique(3), 0.5).matrix, clique(3).adjacency())
    M = shifted_adjacency(Graph(3), 0.5).matrix
    assert np.all(M[~np.eye(3, dtype=bool)] == -1.0)
    G = er_sample(20, 0.4, seed=2)
    assert np.array_equal(shifted_adjacency(G, 0.0).matrix, G.adjacency())
    with pytest.raises(InvalidArgumentError):
        shifted_adjacency(G, 1.0)


@given(graphs(), st.floats(0.0, 0.95))
def test_shifted_adjacency_two_values(G, p):
    M = shifted_adjacency(G, p).matrix
    off = M[~np.eye(G.n, dtype=bool)]
    assert set(np.unique(off)) <= {1.0, -p / (1 - p)}
    assert np.array_equal(M, M.T) and np.all(np.diag(M) == 0)


def test_shifted_adjacency_centered_under_null():
    q0, n = 0.3, 200
    vals = np.concatenate([shifted_adjacency(er_sample(n, q0, seed=s), q0).matrix[np.triu_indices(n, 1)]
                           for s in range(10)])
    assert abs(vals.mean()) <= 4 * vals.std() / math.sqrt(vals.size)


def test_sigma():
    assert sigma(0.5) == 1.0
    assert math.isclose(sigma(0.1), 1 / 3)
