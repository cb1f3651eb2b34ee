"""Command-line interface: ``wspdfuse <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input or configuration and 3
for failures while computing. Output files are written to a temporary
name and moved into place only after every output of the command is
complete, so a failed run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from . import datagen
from .bench import bench_compare, format_table
from .clustering import kmedoids, labels_to_csv
from .exceptions import ConfigError, DimensionMismatchError, PointSetError, StageError, WspdFuseError
from .geometry import DEFAULT_BALL_EPS
from .path_metric import (
    PathParams,
    build_candidate_graph,
    full_graph_weights,
    knn_to_csv,
    oracle_knn,
    pwspm_all_pairs,
    pwspm_knn,
)
from .pipeline import FusionConfig, run_fusion
from .split_tree import build_split_tree
from .wspd import realize

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3

_VALIDATION_ERRORS = (ConfigError, PointSetError, DimensionMismatchError, ValueError, OSError)


class _Outputs:
    """Collects output files and commits them together."""

    def __init__(self):
        self._pending = []

    def write(self, path, text):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        self._pending.append((tmp, path))

    def commit(self):
        for tmp, path in self._pending:
            os.replace(tmp, path)
        self._pending = []

    def discard(self):
        for tmp, _ in self._pending:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(tmp)
        self._pending = []


def _emit(out, path, text):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        out.write(path, text)


def _read_points(path):
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return datagen.read_points_csv(text)


def _k_prune(value, n):
    if value is None:
        return None
    if isinstance(value, str) and value.upper() in {"N-1", "ALL", "MAX"}:
        return n - 1
    try:
        k = int(value)
    except ValueError:
        raise ConfigError(f"--k-prune must be an integer or 'N-1', got {value!r}") from None
    return k


def _dist_spec(args):
    params = {}
    for name in datagen.FAMILIES[args.dist][0]:
        val = getattr(args, name)
        if val is not None:
            params[name] = val
    return datagen.DistributionSpec(args.dist, args.dim, args.count, args.seed, params)


def _add_dist_args(p, required=True):
    p.add_argument("--dist", choices=sorted(datagen.FAMILIES), default="uniform", help="distribution family")
    p.add_argument("--dim", type=int, required=required, help="ambient dimension (> 1)")
    p.add_argument("--count", type=int, required=required, help="number of points")
    p.add_argument("--seed", type=int, default=0)
    for name in ("min", "max", "mean", "stddev", "location", "scale", "rate", "log_mean", "log_stddev"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, default=None)


def _add_path_args(p, clusters=False):
    p.add_argument("--num-neighbors", "-K", type=int, default=4, help="neighbours to report (K)")
    p.add_argument("--power", type=float, default=2.0, help="power weighting p >= 1")
    p.add_argument("--k-prune", default=None, help="candidate edges per vertex (integer or N-1); default K")
    if clusters:
        p.add_argument("--num-clusters", type=int, default=2)
        p.add_argument("--max-iter", type=int, default=100)


def _load_config(ref):
    path = Path(ref)
    if not path.exists():
        name = ref if ref.endswith(".toml") else f"{ref}.toml"
        bundled = resources.files("wspdfuse") / "configs" / name
        if not bundled.is_file():
            raise ConfigError(f"no such config file or bundled config: {ref}")
        with resources.as_file(bundled) as p:
            return FusionConfig.from_toml(p)
    return FusionConfig.from_toml(path)


def cmd_generate(args, out):
    spec = _dist_spec(args)
    _emit(out, args.output, datagen.points_to_csv(datagen.generate(spec), seed=spec.seed))


def cmd_tree(args, out):
    tree = build_split_tree(_read_points(args.input), args.ball_eps)
    if args.with_balls:
        tree.compute_balls()
    _emit(out, args.output, tree.to_json() + "\n")


def cmd_wspd(args, out):
    tree = build_split_tree(_read_points(args.input), args.ball_eps)
    r = realize(tree, args.s)
    _emit(out, args.output, r.to_jsonl())
    summary = json.dumps(r.summary(), indent=2) + "\n"
    if args.summary:
        _emit(out, args.summary, summary)
    else:
        sys.stderr.write(summary)


def cmd_knn(args, out):
    pts = _read_points(args.input)
    n = len(pts)
    K = min(args.num_neighbors, n - 1)
    if args.oracle:
        W = full_graph_weights(pts.points, args.power)
        results = [oracle_knn(pts.points, i, K, args.power, W) for i in range(n)]
    else:
        params = PathParams(args.power, args.num_neighbors, _k_prune(args.k_prune, n))
        graph = build_candidate_graph(pts, min(params.effective_k_prune, n - 1), params.p)
        results = [pwspm_knn(graph, i, K) for i in range(n)]
    _emit(out, args.output, knn_to_csv(results))


def cmd_cluster(args, out):
    pts = _read_points(args.input)
    n = len(pts)
    params = PathParams(args.power, args.num_neighbors, _k_prune(args.k_prune, n))
    graph = build_candidate_graph(pts, min(params.effective_k_prune, n - 1), params.p)
    result = kmedoids(pwspm_all_pairs(graph), args.num_clusters, args.max_iter)
    _emit(out, args.output, labels_to_csv(result.labels, pts.points))


def _projection_csv(res):
    labels = np.full(len(res.points), -1, dtype=int)
    labels[res.selected_indices] = res.clusters.labels
    lines = ["point_index,x0,x1,selected,cluster_id"]
    for i, row in enumerate(res.points.points):
        lines.append(f"{i},{row[0]!r},{row[1]!r},{int(labels[i] >= 0)},{labels[i]}")
    return "\n".join(lines) + "\n"


def _config_from_args(args):
    if args.config:
        return _load_config(args.config)
    if args.dim is None or args.count is None or args.s is None:
        raise ConfigError("either --config or all of --dim, --count and --s are required")
    return FusionConfig(
        data=_dist_spec(args),
        s=args.s,
        path=PathParams(args.power, args.num_neighbors, None if args.k_prune is None else int(args.k_prune)),
        num_clusters=args.num_clusters,
        ball_eps=args.ball_eps,
        max_iter=args.max_iter,
    )


def cmd_fuse(args, out):
    cfg = _config_from_args(args)
    res = run_fusion(cfg)
    report = json.dumps(res.report(), indent=2) + "\n"
    if args.output_dir:
        d = Path(args.output_dir)
        out.write(d / "report.json", report)
        out.write(d / "knn.csv", res.knn_csv())
        out.write(d / "labels.csv", res.labels_csv())
        out.write(d / "projection.csv", _projection_csv(res))
        out.write(d / "points.csv", datagen.points_to_csv(res.points, seed=cfg.data.seed))
    sys.stdout.write(report)


def cmd_bench(args, out):
    refs = args.config or ["fig10", "fig13", "fig16"]
    configs = [_load_config(c) for c in refs]
    reports = [bench_compare(c, args.iterations) for c in configs]
    table = format_table(reports, configs)
    sys.stdout.write(table)
    payload = json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
    if args.output:
        _emit(out, args.output, payload)
    else:
        sys.stdout.write(payload)


def build_parser():
    parser = argparse.ArgumentParser(prog="wspdfuse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write seeded synthetic points as CSV")
    _add_dist_args(p)
    p.add_argument("--output", "-o", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("tree", help="build the split tree and dump it as JSON")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--ball-eps", type=float, default=DEFAULT_BALL_EPS)
    p.add_argument("--with-balls", action="store_true", help="include every node's enclosing ball")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("wspd", help="realize the s-well-separated pairs (JSON lines)")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--ball-eps", type=float, default=DEFAULT_BALL_EPS)
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--summary", default=None, help="write the summary JSON here instead of stderr")
    p.set_defaults(func=cmd_wspd)

    p = sub.add_parser("knn", help="power-weighted path K nearest neighbours (CSV)")
    p.add_argument("--input", "-i", required=True)
    _add_path_args(p)
    p.add_argument("--oracle", action="store_true", help="textbook complete-graph Dijkstra instead")
    p.add_argument("--output", "-o", default="-")
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("cluster", help="k-medoids on the path metric (CSV labels)")
    p.add_argument("--input", "-i", required=True)
    _add_path_args(p, clusters=True)
    p.add_argument("--output", "-o", default="-")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("fuse", help="run the full WSPD-pruned pipeline")
    p.add_argument("--config", "-c", default=None, help="TOML file or bundled name (fig10, fig13, fig16)")
    _add_dist_args(p, required=False)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--ball-eps", type=float, default=DEFAULT_BALL_EPS)
    _add_path_args(p, clusters=True)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("bench", help="time path KNN + clustering with and without WSPD pruning")
    p.add_argument("--config", "-c", action="append", default=None, help="repeatable; default: all bundled")
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--output", "-o", default=None, help="write the JSON reports here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Outputs()
    try:
        args.func(args, out)
        out.commit()
    except StageError as exc:
        out.discard()
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID if isinstance(exc.cause, _VALIDATION_ERRORS) else EXIT_RUNTIME
    except _VALIDATION_ERRORS as exc:
        out.discard()
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    except WspdFuseError as exc:
        out.discard()
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME
    except BaseException:
        out.discard()
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
