"""Graphs, vertex labelings and the null / planted random-graph samplers.

Vertices are stored 0-based (``0..n-1``) so they index numpy arrays directly;
the text and JSON serialization formats are 1-based.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable

import numpy as np

from ._rng import make_rng
from .exceptions import (
    InvalidArgumentError,
    InvalidEmbeddingError,
    InvalidParameterError,
    SubgraphTooLargeError,
)

#: Largest vertex count for which a dense adjacency matrix is materialized.
DENSE_LIMIT = 10_000

_SAMPLE_CHUNK = 1 << 22


def _normalize_edges(n, edges):
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidArgumentError("edges must be a sequence of (i, j) pairs")
    if np.any(arr[:, 0] == arr[:, 1]):
        raise InvalidArgumentError("self-loops are not allowed")
    if arr.min() < 0 or arr.max() >= n:
        raise InvalidArgumentError(f"edge endpoints must lie in 0..{n - 1}")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keys = np.unique(lo * n + hi)
    return np.column_stack((keys // n, keys % n))


class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    The edge list is stored sorted, with ``i < j`` in every row and no
    duplicates. Instances are immutable; derived views (adjacency matrix,
    degrees, neighbor sets) are computed lazily and cached.

    Args:
        n: number of vertices (``n >= 1``).
        edges: iterable of vertex pairs. Duplicates (in either orientation)
            are merged; self-loops are rejected.
    """

    __slots__ = ("_n", "_edges", "__dict__")

    def __init__(self, n: int, edges: Iterable = ()):
        if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
        self._n = int(n)
        e = _normalize_edges(self._n, list(edges) if not isinstance(edges, np.ndarray) else edges)
        e.setflags(write=False)
        self._edges = e

    @classmethod
    def _from_sorted(cls, n, edges):
        g = cls.__new__(cls)
        g._n = int(n)
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        edges.setflags(write=False)
        g._edges = edges
        return g

    @classmethod
    def from_adjacency(cls, A) -> "Graph":
        """Build a graph from a symmetric 0/1 matrix with zero diagonal."""
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidArgumentError("adjacency must be a square matrix")
        if not np.array_equal(A, A.T):
            raise InvalidArgumentError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise InvalidArgumentError("adjacency must have a zero diagonal")
        i, j = np.nonzero(np.triu(A != 0, 1))
        return cls._from_sorted(A.shape[0], np.column_stack((i, j)))

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> np.ndarray:
        """Read-only ``(m, 2)`` array of edges, sorted, with ``i < j``."""
        return self._edges

    @property
    def m(self) -> int:
        return len(self._edges)

    def __len__(self):
        return self._n

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self._n}, m={self.m})"

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.bincount(self._edges.ravel(), minlength=self._n)
        d.setflags(write=False)
        return d

    @cached_property
    def neighbor_sets(self) -> tuple:
        nbrs = [set() for _ in range(self._n)]
        for i, j in self._edges.tolist():
            nbrs[i].add(j)
            nbrs[j].add(i)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def _adjacency(self):
        if self._n > DENSE_LIMIT:
            raise InvalidArgumentError(
                f"dense adjacency refused for n={self._n} > {DENSE_LIMIT}")
        A = np.zeros((self._n, self._n), dtype=np.float64)
        if self.m:
            A[self._edges[:, 0], self._edges[:, 1]] = 1.0
            A[self._edges[:, 1], self._edges[:, 0]] = 1.0
        A.setflags(write=False)
        return A

    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix (float64, read-only)."""
        return self._adjacency

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.neighbor_sets[i]

    def induced_subgraph(self, vertices) -> "Graph":
        """Subgraph induced on ``vertices``, relabeled ``0..len(vertices)-1`` in the given order."""
        vertices = [int(v) for v in vertices]
        if len(set(vertices)) != len(vertices):
            raise InvalidArgumentError("vertices must be distinct")
        if not vertices:
            raise InvalidArgumentError("induced subgraph needs at least one vertex")
        pos = {v: a for a, v in enumerate(vertices)}
        sub = [(pos[i], pos[j]) for i, j in self._edges.tolist() if i in pos and j in pos]
        return Graph(len(vertices), sub)

    def delete_vertex(self, v: int) -> "Graph":
        """``G \\ v``: remove ``v`` and relabel the remaining vertices in order."""
        return self.induced_subgraph([u for u in range(self._n) if u != v])

    def relabel(self, perm) -> "Graph":
        """Graph with vertex ``i`` renamed ``perm[i]`` (``perm`` a permutation of ``0..n-1``)."""
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (self._n,) or not np.array_equal(np.sort(perm), np.arange(self._n)):
            raise InvalidArgumentError("perm must be a permutation of 0..n-1")
        return Graph(self._n, perm[self._edges]) if self.m else Graph(self._n)

    def union(self, edges) -> "Graph":
        """Graph on the same vertex set with ``edges`` added."""
        extra = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        return Graph(self._n, np.vstack((self._edges, extra)))

    def to_dict(self) -> dict:
        return {"n": self._n, "edges": (self._edges + 1).tolist()}

    @classmethod
    def from_dict(cls, d) -> "Graph":
        edges = np.asarray(d.get("edges", []), dtype=np.int64).reshape(-1, 2)
        return cls(int(d["n"]), edges - 1)


@dataclass(frozen=True, eq=False)
class ShiftedAdjacency:
    """Adjacency matrix with non-edges set to ``-p/(1-p)``.

    Off-diagonal entries are 1 on edges and ``-p/(1-p)`` elsewhere; the
    diagonal is 0. With ``p = 0`` this is the ordinary 0/1 adjacency.
    """

    base: Graph
    p: float

    @property
    def off_value(self) -> float:
        return -self.p / (1.0 - self.p)

    @cached_property
    def matrix(self) -> np.ndarray:
        A = self.base.adjacency()
        M = np.where(A > 0, 1.0, self.off_value)
        np.fill_diagonal(M, 0.0)
        M.setflags(write=False)
        return M


def shifted_adjacency(G: Graph, p: float) -> ShiftedAdjacency:
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise InvalidParameterError(f"p must lie in [0, 1), got {p}")
    return ShiftedAdjacency(G, p)


def sigma(q0: float) -> float:
    """Standard-deviation scale ``sqrt(q0 / (1 - q0))`` of a centered Bernoulli(q0) entry."""
    return math.sqrt(q0 / (1.0 - q0))


@dataclass(frozen=True, eq=False)
class Embedding:
    """Injective labeling of the vertices of ``source`` by vertices ``0..n-1``."""

    source: Graph
    targets: np.ndarray
    n: int

    def __post_init__(self):
        t = np.asarray(self.targets, dtype=np.int64)
        if t.shape != (self.source.n,):
            raise InvalidEmbeddingError(
                f"expected {self.source.n} targets, got shape {t.shape}")
        if self.n < self.source.n:
            raise InvalidEmbeddingError("host graph is smaller than the source graph")
        if t.size and (t.min() < 0 or t.max() >= self.n):
            raise InvalidEmbeddingError(f"targets must lie in 0..{self.n - 1}")
        if len(np.unique(t)) != t.size:
            raise InvalidEmbeddingError("targets must be distinct")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "targets", t)

    def image_edges(self) -> np.ndarray:
        """``phi(E(source))`` as an ``(m, 2)`` array with ``i < j`` per row."""
        e = self.targets[self.source.edges]
        return np.sort(e, axis=1) if len(e) else e.reshape(0, 2)

    @property
    def vertex_set(self) -> frozenset:
        return frozenset(self.targets.tolist())

    def __eq__(self, other):
        if not isinstance(other, Embedding):
            return NotImplemented
        return (self.source == other.source and self.n == other.n
                and np.array_equal(self.targets, other.targets))

    def __hash__(self):
        return hash((self.source, self.n, self.targets.tobytes()))


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    """A planted-model sample together with its hidden labeling."""

    graph: Graph
    hidden: Embedding
    q0: float
    H: Graph
    seed: object = field(default=None)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def planted_vertices(self) -> np.ndarray:
        return np.sort(self.hidden.targets)

    def to_dict(self) -> dict:
        """JSON-ready record; ``hidden[i]`` is the 1-based image of vertex ``i + 1`` of ``H``."""
        return {"graph": self.graph.to_dict(), "H": self.H.to_dict(), "q0": self.q0,
                "hidden": (self.hidden.targets + 1).tolist(),
                "seed": None if self.seed is None else int(self.seed)}

    @classmethod
    def from_dict(cls, d: dict) -> "PlantedInstance":
        G, H = Graph.from_dict(d["graph"]), Graph.from_dict(d["H"])
        hidden = Embedding(H, np.asarray(d["hidden"], dtype=np.int64) - 1, G.n)
        return cls(G, hidden, float(d["q0"]), H, d.get("seed"))

    def __eq__(self, other):
        if not isinstance(other, PlantedInstance):
            return NotImplemented
        return (self.graph == other.graph and self.hidden == other.hidden
                and self.q0 == other.q0 and self.H == other.H)


def _check_prob(q0, name="q0"):
    q0 = float(q0)
    if not 0.0 <= q0 <= 1.0 or math.isnan(q0):
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {q0}")
    return q0


def _decode_pairs(idx, n):
    # row-major enumeration of pairs i < j; row i starts at i*n - i*(i+1)/2
    starts = np.arange(n, dtype=np.int64)
    starts = starts * n - starts * (starts + 1) // 2
    i = np.searchsorted(starts, idx, side="right") - 1
    j = idx - starts[i] + i + 1
    return np.column_stack((i, j))


def _bernoulli_pairs(n, q0, rng):
    total = n * (n - 1) // 2
    if q0 == 0.0 or total == 0:
        return np.empty((0, 2), dtype=np.int64)
    if q0 == 1.0:
        return _decode_pairs(np.arange(total, dtype=np.int64), n)
    chunks = []
    for lo in range(0, total, _SAMPLE_CHUNK):
        size = min(_SAMPLE_CHUNK, total - lo)
        hit = np.flatnonzero(rng.random(size) < q0)
        chunks.append(hit.astype(np.int64) + lo)
    return _decode_pairs(np.concatenate(chunks), n)


def er_sample(n: int, q0: float, seed=0, stream=()) -> Graph:
    """Sample ``G(n, q0)``: every pair is an edge independently with probability ``q0``.

    ``seed`` is a non-negative integer (optionally with ``stream`` ids) or a
    ready-made :class:`numpy.random.Generator`.
    """
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    q0 = _check_prob(q0)
    rng = make_rng(seed, *stream)
    return Graph._from_sorted(n, _bernoulli_pairs(int(n), q0, rng))


def partial_shuffle(n: int, k: int, rng) -> np.ndarray:
    """First ``k`` entries of a Fisher-Yates shuffle of ``0..n-1``."""
    perm = np.arange(n, dtype=np.int64)
    picks = [int(rng.integers(i, n)) for i in range(k)]
    for i, j in enumerate(picks):
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:k].copy()


def plant(n: int, q0: float, H: Graph, seed=0, stream=()) -> PlantedInstance:
    """Sample from the planted model: ``G(n, q0)`` plus a copy of ``H`` on a random labeling."""
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    q0 = _check_prob(q0)
    if H.m == 0:
        raise InvalidArgumentError("the planted graph must have at least one edge")
    if H.n > n:
        raise SubgraphTooLargeError(f"v(H)={H.n} exceeds n={n}")
    rng = make_rng(seed, *stream)
    phi = Embedding(H, partial_shuffle(int(n), H.n, rng), int(n))
    base = _bernoulli_pairs(int(n), q0, rng)
    graph = Graph(int(n), np.vstack((base, phi.image_edges())))
    return PlantedInstance(graph, phi, q0, H, seed if not isinstance(seed, np.random.Generator) else None)


# ---------------------------------------------------------------- families

def clique(k: int) -> Graph:
    if k < 2:
        raise InvalidParameterError(f"clique needs k >= 2, got {k}")
    return Graph._from_sorted(k, np.array(list(combinations(range(k), 2)), dtype=np.int64))


def path(k: int) -> Graph:
    if k < 2:
        raise InvalidParameterError(f"path needs k >= 2, got {k}")
    return Graph(k, [(i, i + 1) for i in range(k - 1)])


def cycle(k: int) -> Graph:
    if k < 3:
        raise InvalidParameterError(f"cycle needs k >= 3, got {k}")
    return Graph(k, [(i, (i + 1) % k) for i in range(k)])


def star(k: int) -> Graph:
    """Star on ``k`` vertices: vertex 0 joined to ``1..k-1``."""
    if k < 2:
        raise InvalidParameterError(f"star needs k >= 2, got {k}")
    return Graph(k, [(0, i) for i in range(1, k)])


def hypercube(m: int) -> Graph:
    """Hypercube on ``2**m`` vertices; bit strings at Hamming distance one are adjacent."""
    if m < 1:
        raise InvalidParameterError(f"hypercube needs m >= 1, got {m}")
    v = np.arange(1 << m)
    edges = [np.column_stack((v[(v >> b) & 1 == 0], v[(v >> b) & 1 == 0] | (1 << b)))
             for b in range(m)]
    return Graph(1 << m, np.vstack(edges))


def regular_tree(d: int, r: int) -> Graph:
    """Tree whose root has ``d`` children and every other internal vertex ``d - 1``; ``r`` generations."""
    if d < 3 or r < 1:
        raise InvalidParameterError(f"regular_tree needs d >= 3 and r >= 1, got d={d}, r={r}")
    edges = []
    frontier = [0]
    nxt = 1
    for gen in range(r):
        children = d if gen == 0 else d - 1
        new_frontier = []
        for parent in frontier:
            for _ in range(children):
                edges.append((parent, nxt))
                new_frontier.append(nxt)
                nxt += 1
        frontier = new_frontier
    return Graph(nxt, edges)


def cycle_power(k: int, m: int) -> Graph:
    """``m``-th power of the ``k``-cycle: ``i ~ j`` iff their cyclic distance is at most ``m``."""
    if m < 1 or 2 * m >= k:
        raise InvalidParameterError(f"cycle_power needs m >= 1 and 2m < k, got k={k}, m={m}")
    return Graph(k, [(i, (i + s) % k) for i in range(k) for s in range(1, m + 1)])


def clique_with_pendant(k: int) -> Graph:
    """Clique on ``0..k-2`` plus vertex ``k-1`` attached to vertex 0 by a single edge."""
    if k < 3:
        raise InvalidParameterError(f"clique_with_pendant needs k >= 3, got {k}")
    return Graph(k, list(combinations(range(k - 1), 2)) + [(0, k - 1)])


FAMILIES = {
    "clique": (clique, ("k",)),
    "hypercube": (hypercube, ("m",)),
    "tree": (regular_tree, ("d", "r")),
    "cycle_power": (cycle_power, ("k", "m")),
    "path": (path, ("k",)),
    "star": (star, ("k",)),
    "cycle": (cycle, ("k",)),
}


def build_family(name: str, **params) -> Graph:
    """Construct a named family member, e.g. ``build_family("clique", k=5)``."""
    try:
        ctor, names = FAMILIES[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    missing = [p for p in names if p not in params]
    if missing:
        raise InvalidParameterError(f"family {name!r} needs parameters {missing}")
    return ctor(*(int(params[p]) for p in names))


# ---------------------------------------------------------------- I/O

def to_edgelist(G: Graph) -> str:
    """Text format: header ``"n m"`` then one ``"i j"`` line per edge (1-based)."""
    lines = [f"{G.n} {G.m}"]
    lines.extend(f"{i + 1} {j + 1}" for i, j in G.edges.tolist())
    return "\n".join(lines) + "\n"


def from_edgelist(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InvalidArgumentError("empty edge-list document")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = [(int(a) - 1, int(b) - 1) for a, b in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise InvalidArgumentError(f"malformed edge list: {exc}") from None
    if len(edges) != m:
        raise InvalidArgumentError(f"header announces {m} edges, found {len(edges)}")
    return Graph(n, edges)


def to_json(G: Graph) -> str:
    return json.dumps(G.to_dict(), separators=(",", ":"))


def from_json(text: str) -> Graph:
    return Graph.from_dict(json.loads(text))


def read_graph(path) -> Graph:
    """Read a graph from ``path``; ``.json`` files use the JSON format, others the edge list."""
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        d = json.loads(text)
        return Graph.from_dict(d["graph"] if "graph" in d else d)
    return from_edgelist(text)


def write_graph(G: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_json(G) if str(path).endswith(".json") else to_edgelist(G))
