"""Fair split tree: recursive midpoint splits along the widest dimension.

Construction is driven by an explicit deque rather than recursion, so
degenerate inputs (long chains of splits) cannot exhaust the call stack.
"""

from __future__ import annotations

import json
from collections import deque

import numpy as np

from .exceptions import ConfigError
from .geometry import DEFAULT_BALL_EPS, Ball, min_enclosing_ball, validate_point_set


class SplitNode:
    """One node of a :class:`SplitTree`.

    ``point_indices`` index into the tree's source point set. The node's
    minimum enclosing ball is computed on first access and cached.
    """

    __slots__ = ("node_id", "parent_id", "point_indices", "bounding_box", "left", "right", "_tree", "_ball")

    def __init__(self, node_id, parent_id, point_indices, tree):
        self.node_id = node_id
        self.parent_id = parent_id
        self.point_indices = point_indices
        pts = tree.source.points[point_indices]
        self.bounding_box = np.stack([pts.min(axis=0), pts.max(axis=0)], axis=1)
        self.left = None
        self.right = None
        self._tree = tree
        self._ball = None

    @property
    def is_leaf(self):
        return self.left is None

    @property
    def size(self):
        return len(self.point_indices)

    @property
    def points(self):
        return self._tree.source.points[self.point_indices]

    @property
    def ball(self):
        ball = self._ball
        if ball is None:
            ball = self._tree._compute_ball(self)
            # concurrent callers may both compute; the result is deterministic
            self._ball = ball
        return ball

    def __repr__(self):
        return f"SplitNode(id={self.node_id}, size={self.size})"


def largest_extent_dimension(node):
    """Index of the widest bounding-box dimension; lowest index on ties."""
    if node.size < 2:
        raise ValueError(f"node {node.node_id} holds a single point; nothing to split")
    extents = node.bounding_box[:, 1] - node.bounding_box[:, 0]
    return int(np.argmax(extents))


def split_node(node, d):
    """Partition ``node``'s indices at the midpoint of dimension ``d``.

    Points with coordinate ``< midpoint`` go left, the rest go right.
    Returns ``(left_indices, right_indices)``.
    """
    if node.size < 2:
        raise ValueError(f"node {node.node_id} holds a single point; nothing to split")
    lo, hi = node.bounding_box[d]
    if not hi > lo:
        raise ValueError(f"node {node.node_id} has zero extent along dimension {d}")
    mid = (lo + hi) / 2.0
    coords = node.points[:, d]
    go_left = coords < mid
    return node.point_indices[go_left], node.point_indices[~go_left]


class SplitTree:
    """Binary decomposition of a point set down to singletons.

    Attributes
    ----------
    root : SplitNode
    source : PointSet
    nodes : list of SplitNode
        All nodes in construction order; ``nodes[i].node_id == i``.
    ball_eps : float
        Tolerance for the lazily computed node balls.
    """

    def __init__(self, source, ball_eps=DEFAULT_BALL_EPS):
        if not ball_eps > 0:
            raise ConfigError(f"ball tolerance must be > 0, got {ball_eps!r}")
        self.source = validate_point_set(source)
        self.ball_eps = ball_eps
        self.nodes = []
        self.root = self._new_node(None, np.arange(len(self.source)))
        work = deque([self.root])
        while work:
            node = work.popleft()
            if node.size == 1:
                continue
            d = largest_extent_dimension(node)
            left_idx, right_idx = split_node(node, d)
            node.left = self._new_node(node.node_id, left_idx)
            node.right = self._new_node(node.node_id, right_idx)
            work.append(node.left)
            work.append(node.right)

    def _new_node(self, parent_id, indices):
        node = SplitNode(len(self.nodes), parent_id, indices, self)
        self.nodes.append(node)
        return node

    @property
    def node_count(self):
        return len(self.nodes)

    def leaves(self):
        return [n for n in self.nodes if n.is_leaf]

    def _compute_ball(self, node):
        if node.size == 1:
            return Ball(node.points[0].copy(), 0.0, (0,))
        init = None
        if not node.is_leaf and node.left._ball is not None and node.right._ball is not None:
            # warm start from the children's support points, mapped to local indices
            offsets = {int(g): i for i, g in enumerate(node.point_indices)}
            init = sorted(
                {offsets[int(child.point_indices[j])] for child in (node.left, node.right) for j in child._ball.support}
            )
        return min_enclosing_ball(node.points, self.ball_eps, init=init)

    def compute_balls(self):
        """Fill every node's ball cache bottom-up (children before parents)."""
        for node in reversed(self.nodes):
            node.ball
        return self

    def to_dict(self):
        nodes = []
        for n in self.nodes:
            entry = {
                "node_id": n.node_id,
                "parent_id": n.parent_id,
                "point_indices": n.point_indices.tolist(),
                "left": None if n.is_leaf else n.left.node_id,
                "right": None if n.is_leaf else n.right.node_id,
            }
            if n._ball is not None:
                entry["ball"] = {"center": n._ball.center.tolist(), "radius": n._ball.radius}
            nodes.append(entry)
        return {"dim": self.source.dim, "num_points": len(self.source), "node_count": self.node_count, "nodes": nodes}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def build_split_tree(points, ball_eps=DEFAULT_BALL_EPS):
    """Validate ``points`` and build their fair split tree."""
    return SplitTree(points, ball_eps=ball_eps)
