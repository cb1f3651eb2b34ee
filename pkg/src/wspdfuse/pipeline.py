"""WSPD-pruned power-weighted clustering, end to end.

Stages: generate points, build the split tree, realize the separated
pairs, keep the pair with the most points, then run path KNN and
k-medoids on that pair's points only (the two sides pooled together).
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import datagen
from .clustering import kmedoids, labels_to_csv
from .exceptions import ConfigError, StageError, WspdFuseError
from .geometry import DEFAULT_BALL_EPS
from .path_metric import PathParams, build_candidate_graph, knn_to_csv, pwspm_all_pairs, pwspm_knn
from .split_tree import build_split_tree
from .wspd import largest_pair, realize

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

POOLING_NOTE = "both sides of the selected pair are pooled into one point set before KNN and clustering"


@dataclass(frozen=True)
class FusionConfig:
    data: datagen.DistributionSpec
    s: float
    path: PathParams
    num_clusters: int
    ball_eps: float = DEFAULT_BALL_EPS
    max_iter: int = 100
    label: str = ""

    def __post_init__(self):
        if not self.s > 0:
            raise ConfigError(f"separation parameter must be > 0, got {self.s!r}")
        if int(self.num_clusters) != self.num_clusters or self.num_clusters < 1:
            raise ConfigError(f"num_clusters must be a positive integer, got {self.num_clusters!r}")
        if not self.ball_eps > 0:
            raise ConfigError(f"ball_eps must be > 0, got {self.ball_eps!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter!r}")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        data = dict(d.get("data", {}))
        try:
            family = data.pop("family")
            dim = data.pop("dim")
            count = data.pop("count")
        except KeyError as exc:
            raise ConfigError(f"[data] section is missing {exc}") from None
        seed = data.pop("seed", 0)
        spec = datagen.DistributionSpec(family, dim, count, seed, data)
        wspd = d.get("wspd", {})
        path = d.get("path", {})
        cluster = d.get("cluster", {})
        try:
            return cls(
                data=spec,
                s=float(wspd["s"]),
                path=PathParams(
                    p=float(path["power_weighting"]),
                    K=path["num_neighbors"],
                    k_prune=path.get("k_prune"),
                ),
                num_clusters=cluster["num_clusters"],
                ball_eps=float(wspd.get("ball_eps", DEFAULT_BALL_EPS)),
                max_iter=cluster.get("max_iter", 100),
                label=str(d.get("label", "")),
            )
        except KeyError as exc:
            raise ConfigError(f"configuration is missing {exc}") from None

    @classmethod
    def from_toml(cls, path):
        with open(path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(raw)

    def to_dict(self):
        return {
            "label": self.label,
            "data": self.data.to_dict(),
            "wspd": {"s": self.s, "ball_eps": self.ball_eps},
            "path": {
                "num_neighbors": self.path.K,
                "power_weighting": self.path.p,
                "k_prune": self.path.effective_k_prune,
            },
            "cluster": {"num_clusters": self.num_clusters, "max_iter": self.max_iter},
        }

    def caption_parameters(self):
        """Parameters in the vocabulary of the published experiment captions."""
        return {
            "distribution": self.data.family,
            **self.data.params,
            "dim": self.data.dim,
            "count": self.data.count,
            "s": self.s,
            "numClusters": self.num_clusters,
            "numNeighbors": self.path.K,
            "powerWeighting": self.path.p,
        }

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class PathStageResult:
    graph: object
    knn: list
    distances: np.ndarray
    clusters: object


def path_stage(points, params, num_clusters, max_iter=100):
    """Candidate graph, K nearest path neighbours of every point, and k-medoids."""
    n = len(points)
    if params.K > n - 1:
        raise ConfigError(f"need at least K+1={params.K + 1} points, got {n}")
    graph = build_candidate_graph(points, min(params.effective_k_prune, n - 1), params.p)
    knn = [pwspm_knn(graph, i, params.K) for i in range(n)]
    dist = pwspm_all_pairs(graph)
    clusters = kmedoids(dist, num_clusters, max_iter)
    return PathStageResult(graph, knn, dist, clusters)


@dataclass
class FusionResult:
    config: FusionConfig
    points: object
    tree: object
    realization: object
    pair: object
    selected_indices: np.ndarray
    selected_points: object
    path: PathStageResult
    stage_timings: dict = field(default_factory=dict)

    @property
    def knn(self):
        return self.path.knn

    @property
    def clusters(self):
        return self.path.clusters

    def realization_summary(self):
        return {
            "num_pairs": len(self.realization),
            "selected_pair": {
                "node_a_id": self.pair.a.node_id,
                "node_b_id": self.pair.b.node_id,
                "size_a": self.pair.a.size,
                "size_b": self.pair.b.size,
                "gap": self.pair.gap,
                "max_radius": self.pair.max_radius,
            },
        }

    def report(self):
        cl = self.clusters
        return {
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash(),
            "caption_parameters": self.config.caption_parameters(),
            "num_points": len(self.points),
            "realization": self.realization_summary(),
            "num_selected_points": len(self.selected_indices),
            "pooling": POOLING_NOTE,
            "clusters": {
                "num_clusters": cl.num_clusters,
                "sizes": np.bincount(cl.labels, minlength=cl.num_clusters).tolist(),
                "medoids": [int(self.selected_indices[m]) for m in cl.medoids],
                "inertia": cl.inertia,
                "iterations": cl.n_iter,
            },
            "knn_exhausted_sources": [int(self.selected_indices[r.source]) for r in self.knn if r.exhausted],
            "stage_timings": self.stage_timings,
        }

    def knn_csv(self):
        return knn_to_csv(self.knn, index_map=self.selected_indices)

    def labels_csv(self):
        return labels_to_csv(self.clusters.labels, self.selected_points.points, index_map=self.selected_indices)


class _Stages:
    def __init__(self):
        self.timings = {}

    def run(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except WspdFuseError as exc:
            if isinstance(exc, StageError):
                raise
            raise StageError(name, exc) from exc
        self.timings[name] = time.perf_counter() - t0
        return out


def select_pair(realization, K):
    pair = largest_pair(realization)
    if pair.size < K + 1:
        raise ConfigError(
            f"largest separated pair has {pair.size} points but K={K} needs at least {K + 1}; "
            "use a smaller K (numNeighbors) or a smaller s"
        )
    return pair


def run_fusion(cfg, points=None):
    """Run every stage for ``cfg``; ``points`` skips generation when given."""
    st = _Stages()
    if points is None:
        points = st.run("generate", datagen.generate, cfg.data)
    tree = st.run("split_tree", build_split_tree, points, cfg.ball_eps)
    realization = st.run("realize", realize, tree, cfg.s)
    pair = st.run("select", select_pair, realization, cfg.path.K)
    selected = pair.point_indices
    selected_points = points.subset(selected)
    path = st.run("path_metric", path_stage, selected_points, cfg.path, cfg.num_clusters, cfg.max_iter)
    return FusionResult(cfg, points, tree, realization, pair, selected, selected_points, path, st.timings)
