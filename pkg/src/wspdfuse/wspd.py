"""Well-separated pairs over a split tree.

Two point sets with minimum enclosing balls of radii ``r_a``, ``r_b`` are
*s-well separated* when ``s * max(r_a, r_b) <= gap``, where ``gap`` is the
clearance between the balls. A realization lists node pairs of a split
tree such that every pair of distinct source points is covered by exactly
one separated node pair.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, WspdFuseError
from .geometry import ball_gap, min_enclosing_ball, pairwise_distances

logger = logging.getLogger(__name__)


def _check_s(s):
    if not s > 0:
        raise ConfigError(f"separation parameter must be > 0, got {s!r}")


def separation_holds(radius_a, radius_b, gap, s):
    """The raw predicate ``s * max(radius_a, radius_b) <= gap``."""
    _check_s(s)
    return s * max(radius_a, radius_b) <= gap


def separation_threshold(radius_a, radius_b, gap):
    """Largest ``s`` for which the predicate still holds (``inf`` for two points)."""
    r = max(radius_a, radius_b)
    return np.inf if r == 0 else gap / r


def is_well_separated(ball_a, ball_b, s):
    """Whether two balls are s-well separated."""
    return separation_holds(ball_a.radius, ball_b.radius, ball_gap(ball_a, ball_b), s)


@dataclass(frozen=True)
class WspdPair:
    """A separated node pair; ``gap`` and ``max_radius`` are recorded at emission."""

    a: object
    b: object
    gap: float
    max_radius: float

    @property
    def size(self):
        return self.a.size + self.b.size

    @property
    def point_indices(self):
        return np.concatenate([self.a.point_indices, self.b.point_indices])


def _ball_entry(node, cache):
    entry = cache.get(node.node_id)
    if entry is None:
        b = node.ball
        entry = cache[node.node_id] = (b.center.tolist(), b.radius)
    return entry


def find_pairs(u, v, s, emit=None, _cache=None):
    """Separated pairs covering ``u x v``.

    If the two balls are separated the pair is emitted as is; otherwise the
    node with the larger ball (``u`` on ties) is replaced by its two children.
    Runs on an explicit stack and emits in depth-first, left-before-right
    order.
    """
    _check_s(s)
    if np.intersect1d(u.point_indices, v.point_indices).size:
        raise ValueError(f"nodes {u.node_id} and {v.node_id} share points")
    out = [] if emit is None else emit
    cache = {} if _cache is None else _cache
    stack = [(u, v)]
    while stack:
        x, y = stack.pop()
        cx, rx = _ball_entry(x, cache)
        cy, ry = _ball_entry(y, cache)
        # same arithmetic as ball_gap()
        gap = max(0.0, math.dist(cx, cy) - rx - ry)
        r = max(rx, ry)
        if s * r <= gap:
            out.append(WspdPair(x, y, gap, r))
        elif (rx >= ry and not x.is_leaf) or y.is_leaf:
            stack.append((x.right, y))
            stack.append((x.left, y))
        else:
            stack.append((x, y.right))
            stack.append((x, y.left))
    return out


@dataclass
class Realization:
    pairs: list
    s: float
    tree: object

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def summary(self):
        sizes = [p.size for p in self.pairs]
        return {
            "s": self.s,
            "num_points": len(self.tree.source),
            "num_pairs": len(self.pairs),
            "max_pair_size": max(sizes) if sizes else 0,
        }

    def iter_records(self):
        for i, p in enumerate(self.pairs):
            yield {
                "pair_id": i,
                "node_a_id": p.a.node_id,
                "node_b_id": p.b.node_id,
                "size_a": p.a.size,
                "size_b": p.b.size,
                "gap": p.gap,
                "max_radius": p.max_radius,
                "s": self.s,
            }

    def to_jsonl(self):
        return "".join(json.dumps(rec) + "\n" for rec in self.iter_records())


def realize(tree, s):
    """All separated pairs of ``tree``: ``find_pairs(w.left, w.right)`` per internal node.

    Internal nodes are processed in construction order, which fixes the
    emission order.
    """
    _check_s(s)
    tree.compute_balls()
    pairs = []
    cache = {}
    for w in tree.nodes:
        if not w.is_leaf:
            find_pairs(w.left, w.right, s, emit=pairs, _cache=cache)
    return Realization(pairs, s, tree)


def largest_pair(realization):
    """The pair with the most points; the first emitted wins ties."""
    if not realization.pairs:
        raise WspdFuseError("realization is empty (single-point source)")
    best = realization.pairs[0]
    for p in realization.pairs[1:]:
        if p.size > best.size:
            best = p
    return best


def coverage_counts(realization):
    """``N x N`` matrix counting how often each point pair is covered."""
    n = len(realization.tree.source)
    rows, cols = [], []
    for p in realization.pairs:
        ia, ib = p.a.point_indices, p.b.point_indices
        rows.append(np.repeat(ia, len(ib)))
        cols.append(np.tile(ib, len(ia)))
    counts = np.zeros((n, n), dtype=np.int64)
    if rows:
        i, j = np.concatenate(rows), np.concatenate(cols)
        np.add.at(counts, (i, j), 1)
        np.add.at(counts, (j, i), 1)
    return counts


def certificate_violations(realization, tol=1e-9):
    """Pairs failing a fresh recomputation of the predicate or the cross-distance bound.

    Returns a list of ``(pair_index, reason)``.
    """
    eps = realization.tree.ball_eps
    s = realization.s
    bad = []
    for i, p in enumerate(realization.pairs):
        ba, bb = p.a.ball, p.b.ball
        gap = ball_gap(ba, bb)
        r = max(ba.radius, bb.radius)
        if s * r > gap + tol * max(1.0, gap):
            bad.append((i, f"s*max_radius={s * r!r} > gap={gap!r}"))
            continue
        dmin = pairwise_distances(p.a.points, p.b.points).min()
        bound = s * r - 2.0 * eps * r
        if dmin < bound - tol * max(1.0, bound):
            bad.append((i, f"cross distance {dmin!r} < {bound!r}"))
    return bad


def subset_counterexamples(realization, rng, n_subsets=10, pairs=None, tol=1e-9, eps=None):
    """Re-check random sub-pairs of emitted pairs with fresh balls.

    For each examined pair, ``n_subsets`` random non-empty subsets of one
    side (chosen at random among sides with more than one point) are bounded
    anew and tested against the untouched partner. Counterexamples are
    logged with full geometry and returned.
    """
    eps = realization.tree.ball_eps if eps is None else eps
    s = realization.s
    src = realization.tree.source.points
    found = []
    chosen = realization.pairs if pairs is None else pairs
    for p in chosen:
        sides = [(p.a, p.b), (p.b, p.a)]
        sides = [sd for sd in sides if sd[0].size > 1] or sides
        for _ in range(n_subsets):
            part, partner = sides[int(rng.integers(len(sides)))]
            k = int(rng.integers(1, part.size + 1))
            sub = rng.choice(part.point_indices, size=k, replace=False)
            b_sub = min_enclosing_ball(src[sub], eps)
            b_partner = min_enclosing_ball(src[partner.point_indices], eps)
            gap = ball_gap(b_sub, b_partner)
            r = max(b_sub.radius, b_partner.radius)
            if s * r > gap + tol * max(1.0, gap):
                record = {
                    "s": s,
                    "subset": src[np.sort(sub)].tolist(),
                    "partner": src[partner.point_indices].tolist(),
                    "subset_ball": (b_sub.center.tolist(), b_sub.radius),
                    "partner_ball": (b_partner.center.tolist(), b_partner.radius),
                    "gap": gap,
                    "s_times_max_radius": s * r,
                }
                logger.warning("subset separation counterexample: %s", json.dumps(record))
                found.append(record)
    return found
