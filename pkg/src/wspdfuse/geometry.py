"""Points, point sets, distances and minimum enclosing balls.

Points are stored as rows of ``float64`` numpy arrays. A :class:`PointSet`
is an immutable, validated ``(N, n)`` array with ``n > 1``, ``N > 0`` and
pairwise distinct rows.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import ConfigError, DimensionMismatchError, PointSetError

DEFAULT_BALL_EPS = 1e-6


def _as_point(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-d coordinate vector, got shape {a.shape}")
    return a


def _check_same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def euclidean_distance(a, b):
    """L2 distance between two points of equal dimension."""
    a = _as_point(a)
    b = _as_point(b)
    _check_same_dim(a, b)
    # math.dist is deterministic and avoids the overflow of a naive sum of squares
    return math.dist(a.tolist(), b.tolist())


def power_distance(a, b, p):
    """Euclidean distance raised to the power ``p >= 1``."""
    if not p >= 1:
        raise ConfigError(f"power weighting must be >= 1, got {p!r}")
    d = euclidean_distance(a, b)
    if p == 1:
        return d
    return d ** p


def pairwise_distances(X, Y=None):
    """Dense Euclidean distance matrix between the rows of ``X`` and ``Y``."""
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is None else np.asarray(Y, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return cdist(X, Y)


@dataclass(frozen=True)
class PointSet:
    """A validated, immutable collection of distinct points in R^n, n > 1."""

    points: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dim", int(pts.shape[1]))

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, idx):
        return self.points[idx]

    def subset(self, indices):
        """The points at ``indices`` as a new point set (indices must be unique)."""
        return PointSet(self.points[np.asarray(indices, dtype=np.intp)])


def validate_point_set(raw):
    """Check a raw collection of points and return it as a :class:`PointSet`.

    Raises :class:`PointSetError` naming the first violated condition:
    ``"a"`` (not in R^n with n > 1, ragged, or non-finite coordinates),
    ``"b"`` (empty) or ``"c"`` (duplicate points). Duplicates are detected by
    exact coordinate equality.
    """
    if isinstance(raw, PointSet):
        return raw
    if isinstance(raw, np.ndarray):
        rows = list(raw) if raw.ndim >= 1 else [raw]
    else:
        rows = list(raw)
    if len(rows) == 0:
        raise PointSetError("b", "the point set is empty")
    try:
        arr = np.array([np.asarray(r, dtype=np.float64) for r in rows])
    except ValueError as exc:
        raise PointSetError("a", f"points do not share one dimension ({exc})") from None
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise PointSetError("a", f"points do not share one dimension (array shape {arr.shape})")
    if arr.shape[1] <= 1:
        raise PointSetError("a", f"points must lie in R^n with n > 1, got n = {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise PointSetError("a", "coordinates must be finite")
    # fold -0.0 onto 0.0 so equality below is numeric, not sign-of-zero
    arr = arr + 0.0
    keys = np.ascontiguousarray(arr).view(np.dtype((np.void, arr.dtype.itemsize * arr.shape[1])))
    _, first, counts = np.unique(keys.ravel(), return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = int(first[np.argmax(counts > 1)])
        raise PointSetError("c", f"point {arr[dup].tolist()} occurs more than once")
    return PointSet(arr)


@dataclass(frozen=True)
class Ball:
    """Center and radius of an enclosing ball.

    ``support`` optionally lists the indices (into the generating points)
    that carry the optimality certificate; it is used to warm-start
    neighbouring computations.
    """

    center: np.ndarray
    radius: float
    support: tuple = ()

    @property
    def dim(self):
        return self.center.shape[0]


def ball_gap(a, b):
    """Clearance between two balls, ``max(0, |c_a - c_b| - r_a - r_b)``."""
    _check_same_dim(a.center, b.center)
    return max(0.0, euclidean_distance(a.center, b.center) - a.radius - b.radius)


def _circumball_weights(Q):
    """Barycentric weights of the circumcenter of ``Q`` within its affine hull.

    Returns ``None`` when the rows are affinely dependent.
    """
    q0 = Q[0]
    A = Q[1:] - q0
    G = A @ A.T
    rhs = 0.5 * np.diag(G)
    try:
        y = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        return None
    c = y @ A
    resid = np.abs(np.sum((A - c) ** 2, axis=1) - c @ c)
    if resid.size and resid.max() > 1e-9 * max(float(np.max(np.diag(G))), 1e-300):
        return None
    return np.concatenate(([1.0 - y.sum()], y))


def _polish(Q, support):
    """Exact minimum ball of ``Q[support]`` via circumball + support shrinking.

    Returns ``(indices, weights)`` of a non-negative barycentric solution, or
    ``None`` if the linear algebra degenerates.
    """
    idx = list(support)
    while len(idx) >= 2:
        lam = _circumball_weights(Q[idx])
        if lam is None:
            return None
        worst = int(np.argmin(lam))
        if lam[worst] >= -1e-12:
            return np.asarray(idx), np.clip(lam, 0.0, None) / np.clip(lam, 0.0, None).sum()
        del idx[worst]
    return None


def _covering_radius(P, center):
    """Farthest-point distance in the caller's coordinates.

    Takes the larger of the vectorised and the per-point evaluation so that
    containment holds under either, down to the last ulp.
    """
    c = center.tolist()
    per_point = max(math.dist(c, row) for row in P.tolist())
    return max(per_point, float(np.linalg.norm(P - center, axis=1).max()))


def _solve_meb(P, eps, init=None, max_iter=100_000):
    """Core solver; returns ``(center, radius, support_indices)``.

    Away-step Frank-Wolfe on the dual simplex problem. The dual objective is
    a lower bound on the squared optimal radius and the farthest-point
    distance an upper bound on the radius, so the loop stops with a
    certified ``(1 + eps)`` approximation. Each iteration also tries to
    snap to the exact circumball of the current support plus the farthest
    point, which usually finishes the problem in a handful of steps.
    """
    n = P.shape[0]
    if n == 1:
        return P[0].copy(), 0.0, (0,)
    if n == 2:
        c = 0.5 * (P[0] + P[1])
        return c, _covering_radius(P, c), (0, 1)
    origin = P[0]
    Q = P - origin
    u = np.zeros(n)
    if init is not None and len(init) > 0:
        u[np.asarray(list(init), dtype=np.intp)] = 1.0
        u /= u.sum()
    else:
        a = int(np.argmax(np.sum(Q * Q, axis=1)))
        b = int(np.argmax(np.sum((Q - Q[a]) ** 2, axis=1)))
        u[a] = u[b] = 0.5
    bound = (1.0 + eps) ** 2
    for _ in range(max_iter):
        c = u @ Q
        d2 = np.sum((Q - c) ** 2, axis=1)
        dual = float(u @ d2)
        j = int(np.argmax(d2))
        if d2[j] <= bound * dual:
            break
        support = np.flatnonzero(u > 0.0)
        cand = list(support) if j in support else list(support) + [j]
        snapped = _polish(Q, cand)
        if snapped is not None:
            sidx, lam = snapped
            c_new = lam @ Q[sidx]
            dual_new = float(lam @ np.sum((Q[sidx] - c_new) ** 2, axis=1))
            if dual_new > dual * (1.0 + 1e-15):
                u = np.zeros(n)
                u[sidx] = lam
                continue
        if dual <= 0.0:
            u = np.zeros(n)
            u[support[0]] = 0.5
            u[j] = 0.5
            continue
        k = support[int(np.argmin(d2[support]))]
        up = d2[j] / dual - 1.0
        down = 1.0 - d2[k] / dual
        if up >= down or u[k] >= 1.0:
            step = up / (2.0 * (1.0 + up))
            u *= 1.0 - step
            u[j] += step
        else:
            cap = u[k] / (1.0 - u[k])
            step = cap if down >= 1.0 else min(down / (2.0 * (1.0 - down)), cap)
            u *= 1.0 + step
            if step == cap:
                u[k] = 0.0
            else:
                u[k] -= step
        np.clip(u, 0.0, None, out=u)
        u /= u.sum()
    else:
        warnings.warn("minimum enclosing ball did not reach the requested tolerance", RuntimeWarning)
    center = u @ Q + origin
    return center, _covering_radius(P, center), tuple(int(i) for i in np.flatnonzero(u > 0.0))


def min_enclosing_ball(points, eps=DEFAULT_BALL_EPS, init=None):
    """Approximate minimum enclosing ball of a point set.

    The returned radius is the exact distance from the returned center to
    the farthest point, so every point is contained, and it is at most
    ``(1 + eps)`` times the optimal radius.

    Parameters
    ----------
    points : PointSet or array-like of shape (N, n)
    eps : float
        Relative approximation tolerance, ``> 0``.
    init : iterable of int, optional
        Indices to warm-start the support set with.
    """
    if not eps > 0:
        raise ConfigError(f"ball tolerance must be > 0, got {eps!r}")
    if isinstance(points, PointSet):
        P = points.points
    else:
        P = np.asarray(points, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] == 0:
            raise PointSetError("b", "cannot bound an empty point set")
    center, radius, support = _solve_meb(P, eps, init)
    return Ball(center, radius, support)
