"""Power-weighted shortest paths and K-nearest-neighbour queries.

The length of a path ``x0 -> x1 -> ... -> xm`` through the data is
``sum |x_i - x_{i+1}| ** p``. Relaxations are restricted to a candidate
graph joining every point to its ``k_prune`` Euclidean nearest neighbours
(symmetrised), and a query stops as soon as ``K`` vertices are settled.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .exceptions import ConfigError
from .geometry import pairwise_distances, power_distance, validate_point_set


@dataclass(frozen=True)
class PathParams:
    """Power weighting ``p``, neighbours to report ``K``, candidate edges per vertex ``k_prune``.

    ``k_prune`` defaults to ``K``.
    """

    p: float = 2.0
    K: int = 4
    k_prune: int | None = None

    def __post_init__(self):
        if not self.p >= 1:
            raise ConfigError(f"power weighting must be >= 1, got {self.p!r}")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"number of neighbours must be a positive integer, got {self.K!r}")
        if self.k_prune is not None and (int(self.k_prune) != self.k_prune or self.k_prune < 1):
            raise ConfigError(f"k_prune must be a positive integer, got {self.k_prune!r}")

    @property
    def effective_k_prune(self):
        return self.K if self.k_prune is None else self.k_prune


@dataclass
class CandidateGraph:
    """Pruned relaxation graph.

    Attributes
    ----------
    points : ndarray (N, n)
    p : float
    k_prune : int
        Number of Euclidean neighbours kept per vertex (after clamping).
    knn : ndarray (N, k_prune)
        Each vertex's nearest neighbours, ascending by distance, ties by index.
    adjacency : list of ndarray
        Undirected relaxation edges per vertex (union of both kNN directions),
        ascending by distance.
    weights : list of ndarray
        ``|u - v| ** p`` aligned with ``adjacency``.
    """

    points: np.ndarray
    p: float
    k_prune: int
    knn: np.ndarray
    adjacency: list
    weights: list
    _lists: list = field(default=None, repr=False)

    @property
    def num_vertices(self):
        return self.points.shape[0]

    def edge_lists(self):
        if self._lists is None:
            self._lists = [list(zip(a.tolist(), w.tolist())) for a, w in zip(self.adjacency, self.weights)]
        return self._lists

    def to_csr(self):
        n = self.num_vertices
        rows = np.repeat(np.arange(n), [len(a) for a in self.adjacency])
        cols = np.concatenate(self.adjacency) if n else np.empty(0, dtype=np.intp)
        vals = np.concatenate(self.weights) if n else np.empty(0)
        return csr_matrix((vals, (rows, cols)), shape=(n, n))


def build_candidate_graph(points, k_prune, p=1.0):
    """Exact Euclidean kNN lists with symmetric closure, by brute force.

    ``k_prune >= N`` is clamped to ``N - 1`` with a warning.
    """
    ps = validate_point_set(points)
    X = ps.points
    n = X.shape[0]
    if not p >= 1:
        raise ConfigError(f"power weighting must be >= 1, got {p!r}")
    if int(k_prune) != k_prune or k_prune < 1:
        raise ConfigError(f"k_prune must be a positive integer, got {k_prune!r}")
    k = int(k_prune)
    if k > n - 1:
        if n > 1:
            warnings.warn(f"k_prune={k} >= N={n}; clamped to {n - 1}", RuntimeWarning, stacklevel=2)
        k = n - 1
    D = pairwise_distances(X)
    np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1, kind="stable")
    knn = order[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    if k:
        rows = np.repeat(np.arange(n), k)
        mask[rows, knn.ravel()] = True
    mask |= mask.T
    # weights recomputed per edge so they equal power_distance() bit for bit
    Xl = X.tolist()
    p = float(p)
    adjacency, weights = [], []
    for i in range(n):
        nbrs = order[i][mask[i, order[i]]]
        xi = Xl[i]
        w = [math.dist(xi, Xl[j]) for j in nbrs.tolist()]
        if p != 1.0:
            w = [d ** p for d in w]
        adjacency.append(nbrs)
        weights.append(np.array(w))
    return CandidateGraph(X, float(p), k, knn, adjacency, weights)


@dataclass(frozen=True)
class PathKnnResult:
    """``neighbors`` holds ``(vertex, path_distance)`` in settlement order.

    ``exhausted`` is set when fewer than ``K`` vertices were reachable.
    """

    source: int
    neighbors: tuple
    exhausted: bool = False

    @property
    def indices(self):
        return np.array([v for v, _ in self.neighbors], dtype=np.intp)

    @property
    def distances(self):
        return np.array([d for _, d in self.neighbors])


def pwspm_knn(graph, source, K):
    """K nearest neighbours of ``source`` under the power-weighted path metric.

    Dijkstra over the candidate graph; equal tentative distances settle in
    vertex-index order, and the search stops once ``K`` vertices other than
    the source are settled.
    """
    if isinstance(K, PathParams):
        K = K.K
    n = graph.num_vertices
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range for {n} vertices")
    if K < 1:
        raise ConfigError(f"K must be >= 1, got {K!r}")
    lists = graph.edge_lists()
    inf = float("inf")
    best = [inf] * n
    best[source] = 0.0
    settled = bytearray(n)
    heap = [(0.0, source)]
    out = []
    push, pop = heapq.heappush, heapq.heappop
    while heap and len(out) < K:
        d, u = pop(heap)
        if settled[u]:
            continue
        settled[u] = 1
        if u != source:
            out.append((u, d))
        for v, w in lists[u]:
            if settled[v]:
                continue
            nd = d + w
            if nd < best[v]:
                best[v] = nd
                push(heap, (nd, v))
    return PathKnnResult(int(source), tuple(out), exhausted=len(out) < K)


def pwspm_all_pairs(graph):
    """``N x N`` matrix of path distances over the candidate graph.

    ``inf`` marks pairs in different connected components. Entries are
    symmetrised by taking the smaller of the two directions, which differ at
    most by floating-point summation order.
    """
    # adjacency already holds both directions of every edge
    M = _csgraph_dijkstra(graph.to_csr(), directed=True)
    M = np.minimum(M, M.T)
    np.fill_diagonal(M, 0.0)
    return M


def is_connected(matrix):
    return bool(np.all(np.isfinite(matrix)))


def full_graph_weights(points, p):
    """Complete-graph edge weights ``power_distance(x_u, x_v, p)``, pair by pair."""
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    W = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            W[u, v] = W[v, u] = power_distance(X[u], X[v], p)
    return W


def full_graph_dijkstra(points, source, p, weights=None):
    """Textbook O(N^2) Dijkstra on the complete graph with ``|u - v| ** p`` edges.

    Independent of the candidate-graph machinery; used as a reference.
    Returns the distance array and the settlement order (ties by index).
    """
    W = full_graph_weights(points, p) if weights is None else weights
    W = W.tolist()
    n = len(W)
    inf = float("inf")
    dist = [inf] * n
    done = [False] * n
    dist[source] = 0.0
    order = []
    for _ in range(n):
        u, du = -1, inf
        for v in range(n):
            if not done[v] and dist[v] < du:
                u, du = v, dist[v]
        if u < 0:
            break
        done[u] = True
        order.append(u)
        row = W[u]
        for v in range(n):
            if not done[v]:
                nd = du + row[v]
                if nd < dist[v]:
                    dist[v] = nd
    return np.array(dist), order


def oracle_knn(points, source, K, p, weights=None):
    """K nearest path neighbours from :func:`full_graph_dijkstra`."""
    dist, order = full_graph_dijkstra(points, source, p, weights)
    out = [(v, float(dist[v])) for v in order if v != source][:K]
    return PathKnnResult(int(source), tuple(out), exhausted=len(out) < K)


def knn_to_csv(results, index_map=None):
    """CSV text with rows ``source_index, rank, neighbor_index, path_distance``.

    ``index_map`` translates local vertex ids back to original point indices.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source_index", "rank", "neighbor_index", "path_distance"])
    for res in results:
        src = res.source if index_map is None else int(index_map[res.source])
        for rank, (v, d) in enumerate(res.neighbors, start=1):
            nb = v if index_map is None else int(index_map[v])
            writer.writerow([src, rank, nb, repr(float(d))])
    return buf.getvalue()
