"""Independent brute-force oracles for validating solvers.

Everything here enumerates exhaustively (factorial time) and shares no code
with the solvers under test.  Winning orders are re-measured with a naive
``math.fsum`` edge loop, which is reversal- and rotation-invariant, so the
zero-tolerance comparisons in the tests are meaningful.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


def naive_path_length(coords, closed: bool = False) -> float:
    pts = list(coords)
    edges = [math.dist(a, b) for a, b in zip(pts[:-1], pts[1:])]
    if closed:
        edges.append(math.dist(pts[-1], pts[0]))
    return math.fsum(edges)


def _dmat(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


@lru_cache(maxsize=None)
def _cycle_orders(n: int, m: int) -> np.ndarray:
    """Every cycle through an m-subset of range(n), smallest element first."""
    rows = []
    for subset in itertools.combinations(range(n), m):
        for perm in itertools.permutations(subset[1:]):
            rows.append((subset[0],) + perm)
    return np.asarray(rows, dtype=np.int64)


@lru_cache(maxsize=None)
def _path_orders(n: int, m: int) -> np.ndarray:
    """Every ordered m-tuple of distinct elements of range(n)."""
    rows = list(itertools.permutations(range(n), m))
    return np.asarray(rows, dtype=np.int64)


def brute_cycle(coords: np.ndarray, m: int) -> tuple[float, tuple[int, ...]]:
    n = len(coords)
    orders = _cycle_orders(n, m)
    D = _dmat(coords)
    lengths = D[orders[:, :-1], orders[:, 1:]].sum(axis=1) + D[orders[:, -1], orders[:, 0]]
    k = int(np.argmin(lengths))
    order = tuple(int(i) for i in orders[k])
    return naive_path_length(coords[list(order)], closed=True), order


def brute_cycle_at_least(coords: np.ndarray, m: int) -> float:
    """Minimum cycle length over subsets of size at least m."""
    n = len(coords)
    return min(brute_cycle(coords, mm)[0] for mm in range(m, n + 1))


def brute_origin_path(coords: np.ndarray, m: int, origin) -> tuple[float, tuple[int, ...]]:
    n = len(coords)
    o = np.asarray(origin, dtype=float)
    orders = _path_orders(n, m)
    D = _dmat(coords)
    base = np.sqrt(((coords - o) ** 2).sum(axis=1))
    lengths = base[orders[:, 0]]
    if m > 1:
        lengths = lengths + D[orders[:, :-1], orders[:, 1:]].sum(axis=1)
    k = int(np.argmin(lengths))
    order = tuple(int(i) for i in orders[k])
    return naive_path_length([o] + [coords[i] for i in order]), order


def brute_diagonal_ratio(
    coords: np.ndarray, lower, upper, max_interior: int | None = None
) -> tuple[float, tuple[int, ...]]:
    """Minimum average edge length over corner-to-corner paths, all subset
    sizes up to ``max_interior`` (or all sizes)."""
    n = len(coords)
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    best_w = math.inf
    best_order: tuple[int, ...] = ()
    limit = n if max_interior is None else min(n, max_interior)
    for m in range(0, limit + 1):
        if m == 0:
            w = float(np.sqrt(((hi - lo) ** 2).sum()))
            if w < best_w:
                best_w, best_order = w, ()
            continue
        orders = _path_orders(n, m)
        D = _dmat(coords)
        base = np.sqrt(((coords - lo) ** 2).sum(axis=1))
        close = np.sqrt(((coords - hi) ** 2).sum(axis=1))
        lengths = base[orders[:, 0]] + close[orders[:, -1]]
        if m > 1:
            lengths = lengths + D[orders[:, :-1], orders[:, 1:]].sum(axis=1)
        ratios = lengths / (m + 1)
        k = int(np.argmin(ratios))
        if ratios[k] < best_w:
            order = tuple(int(i) for i in orders[k])
            length = naive_path_length([lo] + [coords[i] for i in order] + [hi])
            best_w, best_order = length / (m + 1), order
    return best_w, best_order


def brute_oriented_ratio(coords: np.ndarray, lower, upper) -> float:
    """Minimum average edge length over strictly-upward corner-to-corner
    paths in the plane: each subset is traversed in increasing y."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    n = len(coords)
    best = float(np.sqrt(((hi - lo) ** 2).sum()))
    for r in range(1, n + 1):
        for subset in itertools.combinations(range(n), r):
            ys = [coords[i][1] for i in subset]
            if len(set(ys)) != len(ys):
                continue
            seq = [i for _, i in sorted(zip(ys, subset))]
            pts = [lo] + [coords[i] for i in seq] + [hi]
            if any(b[1] <= a[1] for a, b in zip(pts[:-1], pts[1:])):
                continue
            w = naive_path_length(pts) / (r + 1)
            best = min(best, w)
    return best
