"""Timing harness: path KNN + clustering on all points vs on the selected pair.

Both arms run the identical :func:`~wspdfuse.pipeline.path_stage` on
immutable inputs; each arm gets one untimed warm-up round followed by
``iterations`` timed rounds on a monotonic clock. The WSPD build (tree,
realization, pair selection) is timed once and reported separately.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

from . import datagen
from .pipeline import path_stage, select_pair
from .split_tree import build_split_tree
from .wspd import realize


@dataclass(frozen=True)
class TimingReport:
    config_label: str
    iterations: int
    mean_full_seconds: float
    mean_pruned_seconds: float
    wspd_build_seconds: float
    num_points: int
    num_selected_points: int

    @property
    def speedup(self):
        if self.mean_pruned_seconds == 0:
            return float("inf")
        return self.mean_full_seconds / self.mean_pruned_seconds

    def to_dict(self):
        return {**asdict(self), "speedup": self.speedup}


def _time_arm(points, cfg, iterations, clock):
    path_stage(points, cfg.path, cfg.num_clusters, cfg.max_iter)  # warm-up
    total = 0.0
    for _ in range(iterations):
        t0 = clock()
        path_stage(points, cfg.path, cfg.num_clusters, cfg.max_iter)
        total += clock() - t0
    return total / iterations


def bench_compare(cfg, iterations=1000, points=None, clock=time.perf_counter):
    """Mean wall-clock of the path stage on the full data and on the pruned pair."""
    if int(iterations) != iterations or iterations < 1:
        raise ValueError(f"iterations must be a positive integer, got {iterations!r}")
    if points is None:
        points = datagen.generate(cfg.data)
    t0 = clock()
    tree = build_split_tree(points, cfg.ball_eps)
    pair = select_pair(realize(tree, cfg.s), cfg.path.K)
    wspd_seconds = clock() - t0
    pruned = points.subset(pair.point_indices)
    mean_full = _time_arm(points, cfg, iterations, clock)
    mean_pruned = _time_arm(pruned, cfg, iterations, clock)
    label = f"{cfg.label or 'config'}-{cfg.config_hash()}"
    return TimingReport(label, int(iterations), mean_full, mean_pruned, wspd_seconds, len(points), len(pruned))


def format_table(reports, configs):
    """Plain-text table: parameters | without pruning | with pruning | speedup."""
    rows = []
    for rep, cfg in zip(reports, configs):
        d = cfg.data
        params = ", ".join(f"{k}={v:g}" for k, v in d.params.items())
        desc = (
            f"{rep.config_label}: {d.family}({params}), R^{d.dim}, N={d.count}, s={cfg.s:g}, "
            f"numNeighbors={cfg.path.K}, p={cfg.path.p:g}"
        )
        rows.append((desc, f"{rep.mean_full_seconds:.4g} secs", f"{rep.mean_pruned_seconds:.4g} secs", f"{rep.speedup:.2f}x"))
    header = ("Algorithm parameters", "p-wspm w/out pruning", "p-wspm w pruning (WSPD)", "speedup")
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(4)]
    line = lambda r: " | ".join(c.ljust(w) for c, w in zip(r, widths))
    sep = "-+-".join("-" * w for w in widths)
    iters = ", ".join(str(r.iterations) for r in reports)
    out = [f"Timings (mean over {iters} iterations; WSPD build time excluded)", line(header), sep]
    out += [line(r) for r in rows]
    out.append(sep)
    out += [f"{r.config_label}: WSPD build {r.wspd_build_seconds:.4g} secs" for r in reports]
    return "\n".join(out) + "\n"
