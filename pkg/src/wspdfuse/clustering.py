"""k-medoids over a precomputed path-distance matrix.

Path metrics have no centroids, so clusters are represented by medoids.
Initialisation is the deterministic farthest-point rule starting at
index 0; refinement alternates nearest-medoid assignment and medoid
update until the labels stop changing, then tries single medoid swaps
(PAM style) to escape the local optima the alternation gets stuck in.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DisconnectedGraphError


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    medoids: np.ndarray
    inertia: float
    n_iter: int = 0
    inertia_history: tuple = ()

    @property
    def num_clusters(self):
        return len(self.medoids)


def _check_matrix(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square distance matrix, got shape {m.shape}")
    return m


def farthest_point_init(m, k):
    """Medoid seeds: index 0, then repeatedly the point farthest from all chosen seeds."""
    m = _check_matrix(m)
    n = m.shape[0]
    if int(k) != k or k < 1:
        raise ConfigError(f"number of clusters must be a positive integer, got {k!r}")
    if k > n:
        raise ConfigError(f"cannot pick {k} medoids from {n} points")
    chosen = [0]
    nearest = m[0].copy()
    for _ in range(1, int(k)):
        cand = nearest.copy()
        cand[chosen] = -np.inf
        nxt = int(np.argmax(cand))
        chosen.append(nxt)
        nearest = np.minimum(nearest, m[nxt])
    return np.array(chosen, dtype=np.intp)


def _assign(m, medoids):
    order = np.argsort(medoids, kind="stable")
    sub = m[:, medoids[order]]
    pos = np.argmin(sub, axis=1)
    labels = order[pos]
    best = sub[np.arange(m.shape[0]), pos]
    if not np.all(np.isfinite(best)):
        lost = np.flatnonzero(~np.isfinite(best))
        raise DisconnectedGraphError(
            f"{len(lost)} point(s) (first: {int(lost[0])}) are disconnected from every medoid; "
            "increase k_prune or the number of clusters"
        )
    return labels, float(best.sum())


def _best_swap(m, medoids, inertia):
    """Best improving (medoid -> non-medoid) exchange, or ``None``."""
    n = m.shape[0]
    best = None
    best_cost = inertia
    is_medoid = np.zeros(n, dtype=bool)
    is_medoid[medoids] = True
    for c in range(len(medoids)):
        others = np.delete(medoids, c)
        base = m[:, others].min(axis=1) if len(others) else np.full(n, np.inf)
        # cost of every candidate replacement at once: column h replaces medoid c
        costs = np.minimum(base[:, None], m).sum(axis=0)
        costs[is_medoid] = np.inf
        h = int(np.argmin(costs))
        if costs[h] < best_cost * (1.0 - 1e-12):
            best, best_cost = (c, h), costs[h]
    return best


def kmedoids(m, k, max_iter=100):
    """k-medoids by alternation plus swap refinement.

    Ties in assignment go to the medoid with the lower point index; ties in
    the medoid update go to the lower point index. Inertia (sum of distances
    to the assigned medoid) never increases between iterations. ``max_iter``
    bounds the total number of alternation and swap steps.
    """
    m = _check_matrix(m)
    medoids = farthest_point_init(m, k)
    labels, inertia = _assign(m, medoids)
    history = [inertia]
    n_iter = 0
    while n_iter < max_iter:
        n_iter += 1
        new_medoids = medoids.copy()
        for c in range(len(medoids)):
            members = np.flatnonzero(labels == c)
            costs = m[np.ix_(members, members)].sum(axis=0)
            new_medoids[c] = members[int(np.argmin(costs))]
        new_labels, new_inertia = _assign(m, new_medoids)
        stable = np.array_equal(new_labels, labels)
        medoids, labels, inertia = new_medoids, new_labels, new_inertia
        history.append(inertia)
        if not stable:
            continue
        if not np.all(np.isfinite(m)):
            # swap costs are meaningless across components
            break
        swap = _best_swap(m, medoids, inertia)
        if swap is None:
            break
        medoids = medoids.copy()
        medoids[swap[0]] = swap[1]
        labels, inertia = _assign(m, medoids)
        history.append(inertia)
    return ClusterAssignment(labels, medoids, inertia, n_iter, tuple(history))


def labels_to_csv(labels, points=None, index_map=None):
    """CSV ``point_index, cluster_id`` plus ``x0, x1`` (first two coordinates) when points are given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["point_index", "cluster_id"]
    if points is not None:
        header += ["x0", "x1"]
    writer.writerow(header)
    for i, lab in enumerate(labels):
        row = [i if index_map is None else int(index_map[i]), int(lab)]
        if points is not None:
            row += [repr(float(points[i][0])), repr(float(points[i][1]))]
        writer.writerow(row)
    return buf.getvalue()
