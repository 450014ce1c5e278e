"""Reproducible random point clouds in boxes, plus exact path-length geometry.

Two generators are provided: a rate-``rate`` Poisson process on an
axis-aligned box, and a fixed number of i.i.d. uniform points.  Every draw is
addressed by a (master seed, replicate) pair through a counter-based Philox
stream, so a sample can be regenerated bit-for-bit no matter how work is
spread over processes or threads.

Path lengths are accumulated with ``math.fsum`` so that a path and its
reversal (or any rotation of a closed order) have *exactly* equal length.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "LOWER_CORNER",
    "UPPER_CORNER",
    "Region",
    "Provenance",
    "PointSet",
    "stream",
    "sample_poisson",
    "sample_uniform",
    "path_length",
    "points_to_csv",
    "write_points_csv",
    "read_points_csv",
]

# Named path endpoints: the region's lower corner and the diagonally opposite
# corner.  They are legal only at the two ends of an open path.
LOWER_CORNER = "lower"
UPPER_CORNER = "upper"

_U64 = 2**64 - 1


def stream(seed: int, replicate: int, lane: int = 0) -> np.random.Generator:
    """Counter-based RNG stream for one (seed, replicate) cell.

    Streams with distinct (replicate, lane) keys are independent, so
    replicates may run serially or on any worker pool and still produce
    identical numbers.  ``lane`` separates consumers that share a replicate
    (0: sampling, 1: search heuristics).
    """
    if replicate < 0:
        raise ValueError("replicate index must be >= 0")
    if lane < 0:
        raise ValueError("lane must be >= 0")
    ss = np.random.SeedSequence(entropy=int(seed) & _U64, spawn_key=(int(replicate), int(lane)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Region:
    """Axis-aligned box: lower corner plus strictly positive side lengths."""

    lower: tuple[float, ...]
    sides: tuple[float, ...]

    def __post_init__(self) -> None:
        lower = tuple(float(x) for x in self.lower)
        sides = tuple(float(x) for x in self.sides)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "sides", sides)
        if not lower or len(lower) != len(sides):
            raise ValueError("lower corner and sides must share a nonzero dimension")
        if any(not math.isfinite(x) for x in lower + sides):
            raise ValueError("region coordinates must be finite")
        if any(s <= 0.0 for s in sides):
            raise ValueError("all side lengths must be strictly positive")

    @classmethod
    def cube(cls, side: float, dim: int, corner: float = 0.0) -> "Region":
        return cls((float(corner),) * dim, (float(side),) * dim)

    @property
    def dim(self) -> int:
        return len(self.sides)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(lo + s for lo, s in zip(self.lower, self.sides))

    @property
    def volume(self) -> float:
        return math.prod(self.sides)

    def is_cube(self) -> bool:
        return all(s == self.sides[0] for s in self.sides)

    @property
    def side(self) -> float:
        if not self.is_cube():
            raise ValueError("region is not a cube")
        return self.sides[0]

    def corner(self, which: str) -> np.ndarray:
        if which == LOWER_CORNER:
            return np.asarray(self.lower, dtype=float)
        if which == UPPER_CORNER:
            return np.asarray(self.upper, dtype=float)
        raise ValueError(f"unknown corner reference {which!r}")

    def contains(self, coords: np.ndarray) -> np.ndarray:
        """Closed-box membership for an (n, dim) coordinate array."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.logical_and(coords >= lo, coords <= hi).all(axis=1)


@dataclass(frozen=True)
class Provenance:
    """How a point set came to be: generator kind, its size parameter, seed cell."""

    kind: str  # "poisson" | "uniform" | "file" | "derived"
    rate_or_n: float
    seed: int
    replicate: int


@dataclass(frozen=True, eq=False)
class PointSet:
    """Indexed d-dimensional points inside a region, with provenance.

    Immutable; operations refer to points by index.  Regenerating with the
    same provenance yields identical coordinates.
    """

    dim: int
    coords: np.ndarray  # (n, dim) float64, read-only
    region: Region
    provenance: Provenance

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError("ambient dimension must be >= 2")
        coords = np.array(self.coords, dtype=float, copy=True).reshape(-1, self.dim)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if self.region.dim != self.dim:
            raise ValueError("region dimension does not match point dimension")
        if len(coords) and not self.region.contains(coords).all():
            raise ValueError("all points must lie inside the region (closed box)")

    def __len__(self) -> int:
        return len(self.coords)

    def point(self, index: int) -> np.ndarray:
        return self.coords[index]


def _validate_region(region: Region) -> None:
    if not isinstance(region, Region):
        raise ValueError("region must be a Region")
    if region.dim < 2:
        raise ValueError("sampling requires dimension >= 2")


def sample_poisson(region: Region, rate: float, seed: int, replicate: int = 0) -> PointSet:
    """Rate-``rate`` Poisson point process on ``region``.

    The count is Poisson(rate * volume); given the count, points are i.i.d.
    uniform in the box.  Deterministic given (seed, replicate).
    """
    _validate_region(region)
    if not (rate > 0.0 and math.isfinite(rate)):
        raise ValueError("rate must be strictly positive and finite")
    rng = stream(seed, replicate)
    count = int(rng.poisson(rate * region.volume))
    u = rng.random((count, region.dim))
    coords = np.asarray(region.lower) + u * np.asarray(region.sides)
    return PointSet(region.dim, coords, region, Provenance("poisson", float(rate), seed, replicate))


def sample_uniform(n: int, region: Region, seed: int, replicate: int = 0) -> PointSet:
    """Exactly ``n`` i.i.d. uniform points in ``region``, deterministic given (seed, replicate)."""
    _validate_region(region)
    if n < 0:
        raise ValueError("point count must be >= 0")
    rng = stream(seed, replicate)
    u = rng.random((int(n), region.dim))
    coords = np.asarray(region.lower) + u * np.asarray(region.sides)
    return PointSet(region.dim, coords, region, Provenance("uniform", int(n), seed, replicate))


def _resolve(points: PointSet, ref: int | str) -> np.ndarray:
    if isinstance(ref, str):
        return points.region.corner(ref)
    return points.coords[int(ref)]


def path_length(points: PointSet, order: Sequence[int | str], closed: bool = False) -> float:
    """Sum of consecutive Euclidean distances along ``order``.

    ``order`` holds point indices, except that an open path may start and/or
    end at a named region corner (LOWER_CORNER / UPPER_CORNER).  Point indices
    must be distinct.  For ``closed`` the wrap-around edge is included.
    """
    refs = list(order)
    corner_positions = [k for k, r in enumerate(refs) if isinstance(r, str)]
    if corner_positions:
        if closed:
            raise ValueError("named corners are only allowed on open paths")
        if any(k not in (0, len(refs) - 1) for k in corner_positions):
            raise ValueError("named corners are only allowed at the two ends")
    indices = [int(r) for r in refs if not isinstance(r, str)]
    if len(set(indices)) != len(indices):
        raise ValueError("point indices in a path must be distinct")
    if len(refs) < 2:
        return 0.0
    pts = [_resolve(points, r) for r in refs]
    edges = [math.dist(a, b) for a, b in zip(pts[:-1], pts[1:])]
    if closed:
        edges.append(math.dist(pts[-1], pts[0]))
    return math.fsum(edges)


# ---------------------------------------------------------------------------
# CSV serialization.  Schema: one header line `dim,seed,replicate,rate_or_n`,
# one metadata row, then one row per point with d coordinate columns rendered
# as shortest round-trip decimals (Python repr), so reloads are bit-exact.


def _fmt(x: float | int) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def points_to_csv(points: PointSet) -> str:
    prov = points.provenance
    lines = ["dim,seed,replicate,rate_or_n"]
    lines.append(f"{points.dim},{prov.seed},{prov.replicate},{_fmt(prov.rate_or_n)}")
    for row in points.coords:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def write_points_csv(points: PointSet, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(points_to_csv(points))


def _default_region(dim: int, coords: np.ndarray) -> Region:
    if len(coords) == 0:
        return Region.cube(1.0, dim)
    lower = np.minimum(coords.min(axis=0), 0.0)
    sides = np.maximum(coords.max(axis=0) - lower, 1.0)
    return Region(tuple(lower), tuple(sides))


def read_points_csv(source: str | io.TextIOBase, region: Region | None = None) -> PointSet:
    """Load a point set written by :func:`points_to_csv`.

    ``region`` overrides the default (the bounding box floored at the origin),
    which matters when the file is used for corner-to-corner path solving.
    """
    if isinstance(source, str):
        with open(source, "r", newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or lines[0] != "dim,seed,replicate,rate_or_n":
        raise ValueError("not a point-set CSV: bad header")
    dim_s, seed_s, rep_s, ron_s = lines[1].split(",")
    dim = int(dim_s)
    rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[2:]]
    if any(len(r) != dim for r in rows):
        raise ValueError("coordinate row does not match declared dimension")
    coords = np.array(rows, dtype=float).reshape(-1, dim)
    if region is None:
        region = _default_region(dim, coords)
    prov = Provenance("file", float(ron_s), int(seed_s), int(rep_s))
    return PointSet(dim, coords, region, prov)
