"""Exponential-time exact solvers for small instances.

Three functionals are solved by dynamic programming over (visited subset,
last point) states:

* shortest cycle through exactly ``m`` of ``n`` points,
* shortest open path from a fixed origin through exactly ``m`` points,
* minimum average edge-length corner-to-corner path (all subset sizes, or
  at most ``max_interior`` interior points).

All three fail fast with :class:`CapacityError` above a configurable point
cap (default 18, about 18 * 2**18 DP states); callers should switch to the
heuristics in :mod:`meanpath.search` beyond that.

Reported lengths are recomputed with ``math.fsum`` over the chosen order, so
they are reversal-invariant and reproducible exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .points import LOWER_CORNER, UPPER_CORNER, PointSet, Region, path_length

__all__ = [
    "DEFAULT_CAP",
    "CapacityError",
    "InfeasibleError",
    "CycleSolution",
    "PathSolution",
    "RatioPath",
    "distance_matrix",
    "exact_k_cycle",
    "exact_all_k_cycles",
    "exact_origin_path",
    "exact_diagonal_ratio",
    "uniform_boundedness_constant",
    "solution_csv_row",
    "SOLUTION_CSV_HEADER",
]

DEFAULT_CAP = 18


def uniform_boundedness_constant(d: int) -> float:
    """A1 in the worst-case tour bound L(n) <= A1 * s * n^((d-1)/d).

    Derivation (boustrophedon tour on n points in a side-s cube): split the
    cube into q^(d-1) tubes with q = ceil(n^(1/d)); snaking through the tubes
    costs at most s per tube along the axis, each of the n in-tube edges moves
    at most sqrt(d)*s/q across, and tube hops plus the closing edge add lower
    order terms.  Rounding all small-n slack upward gives the generous
    A1 = 2*(1 + sqrt(d)), which also covers the degenerate 2-point "cycle" of
    length 2|x-y|.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    return 2.0 * (1.0 + math.sqrt(d))


class CapacityError(RuntimeError):
    """Instance exceeds the exact-solver point cap; use the heuristics."""


class InfeasibleError(ValueError):
    """No feasible solution for the requested subset size."""


@dataclass(frozen=True, eq=False)
class CycleSolution:
    """A cycle through ``selected`` (visit order), of total ``length``.

    A 2-point cycle has length 2|x - y| (both edges counted).
    """

    selected: tuple[int, ...]
    length: float
    m: int
    optimal: bool

    def __post_init__(self) -> None:
        if self.m != len(self.selected):
            raise ValueError("m must equal the number of selected points")
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected indices must be distinct")


@dataclass(frozen=True, eq=False)
class PathSolution:
    """Open path from a fixed origin through ``order`` (m point indices)."""

    order: tuple[int, ...]
    origin: tuple[float, ...]
    length: float
    m: int
    optimal: bool

    def __post_init__(self) -> None:
        if self.m != len(self.order):
            raise ValueError("m must equal the number of path points")
        if len(set(self.order)) != len(self.order):
            raise ValueError("path indices must be distinct")


@dataclass(frozen=True, eq=False)
class RatioPath:
    """Corner-to-corner path with its average edge length ``w = length / m``.

    ``order`` is (LOWER_CORNER, interior point indices..., UPPER_CORNER) and
    ``m`` counts edges, i.e. interior points + 1.
    """

    order: tuple
    length: float
    m: int
    w: float
    constraint_max_points: int | None
    optimal: bool
    points: PointSet | None = None
    region: Region | None = None

    def __post_init__(self) -> None:
        interior = self.interior
        if self.m != len(interior) + 1:
            raise ValueError("edge count must equal interior points + 1")
        if len(set(interior)) != len(interior):
            raise ValueError("interior indices must be distinct")
        if self.w != self.length / self.m:
            raise ValueError("ratio must equal length / m exactly")
        if self.order[0] != LOWER_CORNER or self.order[-1] != UPPER_CORNER:
            raise ValueError("a ratio path runs from the lower to the upper corner")

    @property
    def interior(self) -> tuple[int, ...]:
        return tuple(r for r in self.order if not isinstance(r, str))


def distance_matrix(points: PointSet) -> np.ndarray:
    c = points.coords
    diff = c[:, None, :] - c[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def _check_capacity(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapacityError(
            f"{what}: {n} points exceeds the exact-solver cap of {cap}; "
            "use the search heuristics or raise the cap"
        )


def _popcounts(size: int, n: int) -> np.ndarray:
    masks = np.arange(size, dtype=np.int64)
    pc = np.zeros(size, dtype=np.int64)
    for k in range(n):
        pc += (masks >> k) & 1
    return pc


def _run_dp(
    D: np.ndarray,
    base: np.ndarray | None,
    max_size: int | None = None,
    anchored: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Subset DP over (visited mask, last index).

    dp[mask, j] is the minimal length of an open chain visiting exactly the
    points of ``mask`` and ending at ``j``.  With ``anchored`` the chain
    starts at the lowest index of ``mask`` (cycle construction: extensions
    never go below the anchor); otherwise it starts at an external point
    whose distances are ``base``.  ``max_size`` stops extensions once a mask
    holds that many points.  Returns (dp, parent); parent[mask, j] is the
    previous last index, -1 at chain starts.
    """
    n = len(D)
    size = 1 << n
    dp = np.full((size, n), np.inf)
    parent = np.full((size, n), -1, dtype=np.int8)
    bits = (1 << np.arange(n)).astype(np.int64)
    idx = np.arange(n)
    for j in range(n):
        dp[1 << j, j] = 0.0 if anchored else base[j]
    limit = n if max_size is None else min(max_size, n)
    for mask in range(1, size):
        if int(mask).bit_count() >= limit:
            continue
        row = dp[mask]
        act = idx[np.isfinite(row)]
        if act.size == 0:
            continue
        free = (mask & bits) == 0
        if anchored:
            low = (mask & -mask).bit_length() - 1
            free &= idx > low
        out = idx[free]
        if out.size == 0:
            continue
        trans = row[act][:, None] + D[np.ix_(act, out)]
        k = np.argmin(trans, axis=0)
        cand = trans[k, np.arange(out.size)]
        tgt = mask + bits[out]
        cur = dp[tgt, out]
        better = cand < cur
        if better.any():
            tb, ob = tgt[better], out[better]
            dp[tb, ob] = cand[better]
            parent[tb, ob] = act[k[better]].astype(np.int8)
    return dp, parent


def _walk(parent: np.ndarray, mask: int, last: int) -> list[int]:
    seq = [last]
    while parent[mask, last] >= 0:
        prev = int(parent[mask, last])
        mask ^= 1 << last
        last = prev
        seq.append(last)
    seq.reverse()
    return seq


def _canonical_cycle(order: list[int]) -> tuple[int, ...]:
    """Rotate the minimum index to the front, then pick the lexicographically
    smaller direction, so equivalent cycles serialize identically."""
    k = order.index(min(order))
    fwd = order[k:] + order[:k]
    rev = [fwd[0]] + fwd[1:][::-1]
    return tuple(fwd) if fwd <= rev else tuple(rev)


_TIE_SCAN_LIMIT = 256


def _lex_min_order(candidates: Iterable, reconstruct: Callable) -> tuple:
    """Among equally good DP states, return the lexicographically smallest
    reconstructed order (scan capped; pathological tie sets keep scan order)."""
    best = None
    for i, cand in enumerate(candidates):
        order = reconstruct(cand)
        if best is None or order < best:
            best = order
        if i >= _TIE_SCAN_LIMIT:
            break
    return best


def _cycle_tables(points: PointSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(points)
    D = distance_matrix(points)
    dp, parent = _run_dp(D, None, anchored=True)
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    anchors = np.zeros(size, dtype=np.int64)
    anchors[1:] = np.round(np.log2((masks[1:] & -masks[1:]).astype(float))).astype(np.int64)
    total = dp + D[anchors]  # closing edge back to the anchor
    return parent, total, _popcounts(size, n)


def _extract_cycle(
    points: PointSet, parent: np.ndarray, total: np.ndarray, pc: np.ndarray, m: int
) -> CycleSolution:
    eligible = np.where(pc == m)[0]
    sub = total[eligible]
    best_val = sub.min()
    if not np.isfinite(best_val):
        raise InfeasibleError(f"no cycle through exactly {m} points")
    ties = np.argwhere(sub == best_val)

    def reconstruct(t):
        return _canonical_cycle(_walk(parent, int(eligible[t[0]]), int(t[1])))

    order = reconstruct(ties[0]) if len(ties) == 1 else _lex_min_order(ties, reconstruct)
    length = path_length(points, order, closed=True)
    return CycleSolution(order, length, m, optimal=True)


def exact_k_cycle(points: PointSet, m: int, cap: int = DEFAULT_CAP) -> CycleSolution:
    """Globally shortest cycle through exactly ``m`` of the points.

    Ties between optima resolve to the lexicographically smallest canonical
    visit order.
    """
    n = len(points)
    if m < 2 or m > n:
        raise InfeasibleError(f"cycle needs 2 <= m <= n; got m={m}, n={n}")
    _check_capacity(n, cap, "exact_k_cycle")
    parent, total, pc = _cycle_tables(points)
    return _extract_cycle(points, parent, total, pc, m)


def exact_all_k_cycles(points: PointSet, cap: int = DEFAULT_CAP) -> dict[int, CycleSolution]:
    """One DP pass, then the optimal cycle for every m in 2..n."""
    n = len(points)
    if n < 2:
        raise InfeasibleError("need at least 2 points")
    _check_capacity(n, cap, "exact_all_k_cycles")
    parent, total, pc = _cycle_tables(points)
    return {m: _extract_cycle(points, parent, total, pc, m) for m in range(2, n + 1)}


def exact_origin_path(
    points: PointSet,
    m: int,
    origin: Sequence[float] | None = None,
    cap: int = DEFAULT_CAP,
) -> PathSolution:
    """Shortest open path from ``origin`` (default the zero point) through
    exactly ``m`` distinct points."""
    n = len(points)
    if m < 1 or m > n:
        raise InfeasibleError(f"origin path needs 1 <= m <= n; got m={m}, n={n}")
    _check_capacity(n, cap, "exact_origin_path")
    o = np.zeros(points.dim) if origin is None else np.asarray(origin, dtype=float)
    if o.shape != (points.dim,):
        raise ValueError("origin must have the ambient dimension")
    D = distance_matrix(points)
    base = np.sqrt(((points.coords - o) ** 2).sum(axis=1))
    dp, parent = _run_dp(D, base, max_size=m)
    pc = _popcounts(1 << n, n)
    eligible = np.where(pc == m)[0]
    sub = dp[eligible]
    best_val = sub.min()
    ties = np.argwhere(sub == best_val)

    def reconstruct(t):
        return tuple(_walk(parent, int(eligible[t[0]]), int(t[1])))

    order = reconstruct(ties[0]) if len(ties) == 1 else _lex_min_order(ties, reconstruct)
    pts = [o] + [points.coords[i] for i in order]
    length = math.fsum(math.dist(a, b) for a, b in zip(pts[:-1], pts[1:]))
    return PathSolution(order, tuple(float(x) for x in o), length, m, optimal=True)


def _diagonal_tables(
    points: PointSet, region: Region, max_interior: int | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """DP tables for corner-to-corner paths: total length per (mask, last)
    state (entry edge, chain, exit edge), parents, and mask popcounts."""
    lo = region.corner(LOWER_CORNER)
    hi = region.corner(UPPER_CORNER)
    D = distance_matrix(points)
    base = np.sqrt(((points.coords - lo) ** 2).sum(axis=1))
    close = np.sqrt(((points.coords - hi) ** 2).sum(axis=1))
    dp, parent = _run_dp(D, base, max_size=max_interior)
    total = dp + close
    return total, parent, _popcounts(1 << len(points), len(points))


def _corner_path_length(points: PointSet, region: Region, order: tuple) -> float:
    coords = [region.corner(r) if isinstance(r, str) else points.coords[r] for r in order]
    return math.fsum(math.dist(a, b) for a, b in zip(coords[:-1], coords[1:]))


def exact_diagonal_ratio(
    points: PointSet,
    region: Region | None = None,
    max_interior: int | None = None,
    cap: int = DEFAULT_CAP,
) -> RatioPath:
    """Corner-to-corner path minimizing average edge length over every subset
    size (or sizes up to ``max_interior``).

    With no usable interior point the answer is the single diagonal edge:
    one edge of length s*sqrt(d), ratio s*sqrt(d).
    """
    region = points.region if region is None else region
    n = len(points)
    if max_interior is not None and max_interior < 0:
        raise ValueError("max_interior must be >= 0")
    _check_capacity(n, cap, "exact_diagonal_ratio")
    best_order: tuple = (LOWER_CORNER, UPPER_CORNER)
    best_w = math.dist(region.corner(LOWER_CORNER), region.corner(UPPER_CORNER))
    if n > 0 and (max_interior is None or max_interior > 0):
        total, parent, pc = _diagonal_tables(points, region, max_interior)
        ratio = total / (pc + 1.0)[:, None]
        finite = np.isfinite(ratio)
        if finite.any():
            val = ratio[finite].min()
            if val < best_w:
                ties = np.argwhere(ratio == val)

                def reconstruct(t):
                    return tuple(_walk(parent, int(t[0]), int(t[1])))

                interior = (
                    reconstruct(ties[0]) if len(ties) == 1 else _lex_min_order(ties, reconstruct)
                )
                best_order = (LOWER_CORNER, *interior, UPPER_CORNER)
    length = _corner_path_length(points, region, best_order)
    m = len(best_order) - 1
    return RatioPath(
        best_order,
        length,
        m,
        length / m,
        max_interior,
        optimal=True,
        points=points,
        region=region,
    )


# --- CSV rendering -----------------------------------------------------------

SOLUTION_CSV_HEADER = "functional,n,m,length,ratio,optimal,order"


def solution_csv_row(functional: str, n: int, sol) -> str:
    """One CSV row per solved instance; the order list is ;-separated."""
    if isinstance(sol, CycleSolution):
        order, length, m, ratio, optimal = sol.selected, sol.length, sol.m, sol.length / sol.m, sol.optimal
    elif isinstance(sol, PathSolution):
        order, length, m, ratio, optimal = sol.order, sol.length, sol.m, sol.length / sol.m, sol.optimal
    elif isinstance(sol, RatioPath):
        order, length, m, ratio, optimal = sol.order, sol.length, sol.m, sol.w, sol.optimal
    else:
        raise TypeError(f"unknown solution type {type(sol)!r}")
    order_s = ";".join(str(r) for r in order)
    return f"{functional},{n},{m},{length!r},{ratio!r},{int(optimal)},{order_s}"
