"""Seeded synthetic point clouds.

All draws come from numpy's ``Generator`` backed by PCG64, seeded with
``DistributionSpec.seed``. Coordinates are drawn row by row (point 0 first), each
coordinate independently from the chosen family. Points that collide
exactly with an earlier point are redrawn from the same stream.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .geometry import PointSet, validate_point_set

# family -> (parameter names, defaults)
FAMILIES = {
    "uniform": (("min", "max"), (0.0, 1.0)),
    "gaussian": (("mean", "stddev"), (0.0, 1.0)),
    "cauchy": (("location", "scale"), (0.0, 1.0)),
    "exponential": (("rate",), (1.0,)),
    "lognormal": (("log_mean", "log_stddev"), (0.0, 1.0)),
}


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    dim: int
    count: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown distribution family {self.family!r}; choose from {sorted(FAMILIES)}")
        names, defaults = FAMILIES[self.family]
        unknown = set(self.params) - set(names)
        if unknown:
            raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for family {self.family!r}")
        full = {k: float(self.params.get(k, d)) for k, d in zip(names, defaults)}
        object.__setattr__(self, "params", full)
        if int(self.count) != self.count or self.count < 1:
            raise ConfigError(f"count must be a positive integer, got {self.count!r}")
        if int(self.dim) != self.dim or self.dim <= 1:
            raise ConfigError(f"ambient dimension must be an integer > 1, got {self.dim!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        p = full
        checks = {
            "uniform": p.get("min", 0) < p.get("max", 1),
            "gaussian": p.get("stddev", 1) > 0,
            "cauchy": p.get("scale", 1) > 0,
            "exponential": p.get("rate", 1) > 0,
            "lognormal": p.get("log_stddev", 1) > 0,
        }
        if not checks[self.family]:
            raise ConfigError(f"invalid parameters for {self.family}: {p}")
        if not all(np.isfinite(v) for v in p.values()):
            raise ConfigError(f"non-finite parameters for {self.family}: {p}")

    def to_dict(self):
        return {"family": self.family, "dim": self.dim, "count": self.count, "seed": self.seed, **self.params}


def _draw(rng, spec, rows):
    shape = (rows, spec.dim)
    p = spec.params
    if spec.family == "uniform":
        return rng.uniform(p["min"], p["max"], size=shape)
    if spec.family == "gaussian":
        return rng.normal(p["mean"], p["stddev"], size=shape)
    if spec.family == "cauchy":
        return p["location"] + p["scale"] * rng.standard_cauchy(size=shape)
    if spec.family == "exponential":
        return rng.exponential(1.0 / p["rate"], size=shape)
    return rng.lognormal(p["log_mean"], p["log_stddev"], size=shape)


def generate(spec):
    """Draw ``spec.count`` distinct points; deterministic for a fixed spec."""
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    pts = _draw(rng, spec, spec.count) + 0.0
    while True:
        _, first = np.unique(pts, axis=0, return_index=True)
        if len(first) == len(pts):
            break
        dup = np.setdiff1d(np.arange(len(pts)), first)
        pts[dup] = _draw(rng, spec, len(dup)) + 0.0
    return validate_point_set(pts)


def points_to_csv(points, seed=None):
    """CSV text: ``#``-comment header with dim/count/seed, then one point per row."""
    P = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=np.float64)
    buf = io.StringIO()
    buf.write(f"# dim={P.shape[1]}\n# count={P.shape[0]}\n")
    if seed is not None:
        buf.write(f"# seed={seed}\n")
    for row in P:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def read_points_csv(text):
    """Parse :func:`points_to_csv` output (comment lines ignored) into a validated point set."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field in {line!r}") from None
    return validate_point_set(rows)
