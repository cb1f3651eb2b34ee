"""scikit-learn compatible estimators.

These wrap the functional modules so the algorithms compose with
``Pipeline``, ``clone`` and ``get_params``/``set_params``. Path metrics
are only defined over the fitted sample, so neighbour and cluster queries
refer to the training points.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .clustering import kmedoids
from .geometry import DEFAULT_BALL_EPS, validate_point_set
from .path_metric import PathParams, build_candidate_graph, pwspm_all_pairs, pwspm_knn
from .pipeline import path_stage, select_pair
from .split_tree import build_split_tree
from .wspd import largest_pair, realize


def _validated(X):
    X = check_array(X, dtype=np.float64, ensure_min_features=2)
    return validate_point_set(X)


def _pad_knn(results, k):
    """Stack KNN results into ``(distances, indices)`` arrays padded with ``inf`` / ``-1``."""
    ind = np.full((len(results), k), -1, dtype=np.intp)
    dist = np.full((len(results), k), np.inf)
    for i, res in enumerate(results):
        m = len(res.neighbors)
        ind[i, :m] = res.indices
        dist[i, :m] = res.distances
    return dist, ind


class WellSeparatedPairDecomposition(BaseEstimator):
    """Split tree plus realization of all s-well-separated pairs.

    Parameters
    ----------
    s : float, default=1.0
        Separation parameter.
    ball_eps : float, default=1e-6
        Relative tolerance of the minimum enclosing balls.

    Attributes
    ----------
    tree_ : SplitTree
    realization_ : Realization
    n_pairs_ : int
    selected_indices_ : ndarray
        Sample indices of the largest separated pair (side ``a`` first).
    """

    def __init__(self, s=1.0, ball_eps=DEFAULT_BALL_EPS):
        self.s = s
        self.ball_eps = ball_eps

    def fit(self, X, y=None):
        points = _validated(X)
        self.n_features_in_ = points.dim
        self.tree_ = build_split_tree(points, self.ball_eps)
        self.realization_ = realize(self.tree_, self.s)
        self.n_pairs_ = len(self.realization_)
        self.selected_indices_ = (
            largest_pair(self.realization_).point_indices if self.n_pairs_ else np.arange(len(points))
        )
        return self

    def selected_mask(self):
        check_is_fitted(self, "realization_")
        mask = np.zeros(len(self.tree_.source), dtype=bool)
        mask[self.selected_indices_] = True
        return mask


class PowerWeightedKNN(BaseEstimator):
    """K nearest neighbours under the power-weighted shortest-path metric.

    Parameters
    ----------
    n_neighbors : int, default=4
    power : float, default=2.0
    k_prune : int or None, default=None
        Euclidean candidate edges per vertex; ``None`` means ``n_neighbors``.
    """

    def __init__(self, n_neighbors=4, power=2.0, k_prune=None):
        self.n_neighbors = n_neighbors
        self.power = power
        self.k_prune = k_prune

    def fit(self, X, y=None):
        points = _validated(X)
        params = PathParams(self.power, self.n_neighbors, self.k_prune)
        self.n_features_in_ = points.dim
        n = len(points)
        self.graph_ = build_candidate_graph(points, min(params.effective_k_prune, max(n - 1, 1)), params.p)
        return self

    def kneighbors(self, n_neighbors=None, return_distance=True):
        """Neighbours of every training point, excluding the point itself.

        Sources whose component has fewer than ``n_neighbors`` other points
        are padded with index ``-1`` and distance ``inf``.
        """
        check_is_fitted(self, "graph_")
        k = self.n_neighbors if n_neighbors is None else n_neighbors
        dist, ind = _pad_knn([pwspm_knn(self.graph_, i, k) for i in range(self.graph_.num_vertices)], k)
        return (dist, ind) if return_distance else ind

    def path_distances(self):
        check_is_fitted(self, "graph_")
        return pwspm_all_pairs(self.graph_)


class PowerWeightedKMedoids(ClusterMixin, BaseEstimator):
    """k-medoids on the power-weighted path metric of the sample."""

    def __init__(self, n_clusters=2, n_neighbors=4, power=2.0, k_prune=None, max_iter=100):
        self.n_clusters = n_clusters
        self.n_neighbors = n_neighbors
        self.power = power
        self.k_prune = k_prune
        self.max_iter = max_iter

    def fit(self, X, y=None):
        knn = PowerWeightedKNN(self.n_neighbors, self.power, self.k_prune).fit(X)
        self.n_features_in_ = knn.n_features_in_
        result = kmedoids(knn.path_distances(), self.n_clusters, self.max_iter)
        self.labels_ = result.labels
        self.medoid_indices_ = result.medoids
        self.inertia_ = result.inertia
        self.n_iter_ = result.n_iter
        return self


class WSPDPrunedClustering(ClusterMixin, BaseEstimator):
    """Cluster only the largest s-well-separated pair of the sample.

    Points outside the selected pair are labelled ``-1``.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    selected_indices_ : ndarray
    medoid_indices_ : ndarray
        Medoids as sample indices.
    knn_indices_, knn_distances_ : ndarray of shape (n_selected, n_neighbors)
        Path neighbours of each selected point, as sample indices.
    inertia_ : float
    n_pairs_ : int
    """

    def __init__(self, s=1.0, n_clusters=2, n_neighbors=4, power=2.0, k_prune=None, ball_eps=DEFAULT_BALL_EPS,
                 max_iter=100):
        self.s = s
        self.n_clusters = n_clusters
        self.n_neighbors = n_neighbors
        self.power = power
        self.k_prune = k_prune
        self.ball_eps = ball_eps
        self.max_iter = max_iter

    def fit(self, X, y=None):
        points = _validated(X)
        self.n_features_in_ = points.dim
        params = PathParams(self.power, self.n_neighbors, self.k_prune)
        realization = realize(build_split_tree(points, self.ball_eps), self.s)
        pair = select_pair(realization, params.K)
        sel = pair.point_indices
        stage = path_stage(points.subset(sel), params, self.n_clusters, self.max_iter)
        self.n_pairs_ = len(realization)
        self.selected_indices_ = sel
        self.labels_ = np.full(len(points), -1, dtype=np.intp)
        self.labels_[sel] = stage.clusters.labels
        self.medoid_indices_ = sel[stage.clusters.medoids]
        self.inertia_ = stage.clusters.inertia
        self.knn_distances_, local = _pad_knn(stage.knn, params.K)
        self.knn_indices_ = np.where(local >= 0, sel[np.maximum(local, 0)], -1)
        return self
