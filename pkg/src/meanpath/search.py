"""Heuristic solvers and explicit path constructions at scales the exact
dynamic programs cannot reach.

* subset-tour local search (2-opt, segment relocation, swap-in/swap-out),
* parametric ratio search: iterate c <- w(incumbent) on the transformed
  objective  length - c*edges + c  (the added constant c does not move the
  inner argmin, so the iteration is a plain ratio-parametric descent, and the
  terminal transform value equals the terminal ratio),
* the greedy diagonal path through unit cubes along a cube's main diagonal,
* corner-to-corner path concatenation,
* the planar variant restricted to strictly increasing second coordinate,
  where the precedence order makes the inner minimization an exact DP.

Every search is deterministic given its :class:`SearchOptions`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exact import (
    DEFAULT_CAP,
    CycleSolution,
    InfeasibleError,
    PathSolution,
    RatioPath,
    _corner_path_length,
    _diagonal_tables,
    _walk,
    _canonical_cycle,
    distance_matrix,
)
from .points import (
    LOWER_CORNER,
    UPPER_CORNER,
    PointSet,
    Provenance,
    Region,
    path_length,
    stream,
)

__all__ = [
    "SearchOptions",
    "DinkelbachState",
    "UnsupportedDimensionError",
    "local_search_k_cycle",
    "local_search_origin_path",
    "dinkelbach_ratio_path",
    "greedy_diagonal",
    "greedy_length_constant",
    "concatenate_paths",
    "oriented_path_search",
    "TRACE_CSV_HEADER",
    "trace_csv",
]

_EPS = 1e-12


class UnsupportedDimensionError(ValueError):
    """The oriented variant is only defined in the plane."""


@dataclass(frozen=True)
class SearchOptions:
    """Move set, effort, and RNG cell for the local searches."""

    two_opt: bool = True
    or_opt: bool = True
    swap: bool = True
    max_stagnation: int = 1
    restarts: int = 3
    seed: int = 0
    replicate: int = 0
    max_rounds: int = 200
    tolerance: float = 1e-9
    max_iterations: int = 60

    def __post_init__(self) -> None:
        if not (self.two_opt or self.or_opt or self.swap):
            raise ValueError("at least one move family must be enabled")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_stagnation < 1:
            raise ValueError("max_stagnation must be >= 1")


@dataclass(frozen=True)
class DinkelbachState:
    """One outer iteration of the ratio search."""

    iteration: int
    c: float
    incumbent: RatioPath
    transform_value: float  # length - c*m + c for the incumbent at this c


TRACE_CSV_HEADER = "iteration,c,length,m,w"


def trace_csv(states: Sequence[DinkelbachState]) -> str:
    lines = [TRACE_CSV_HEADER]
    for st in states:
        p = st.incumbent
        lines.append(f"{st.iteration},{st.c!r},{p.length!r},{p.m},{p.w!r}")
    return "\n".join(lines) + "\n"


# --- cycle local search -------------------------------------------------------


def _nn_tour(subset: np.ndarray, start: int, D: np.ndarray) -> np.ndarray:
    remaining = [int(i) for i in subset if i != start]
    tour = [start]
    cur = start
    while remaining:
        rem = np.asarray(remaining)
        k = int(np.argmin(D[cur, rem]))
        cur = int(rem[k])
        tour.append(cur)
        remaining.pop(k)
    return np.asarray(tour, dtype=np.int64)


def _two_opt_pass(tour: np.ndarray, D: np.ndarray) -> bool:
    m = len(tour)
    if m < 4:
        return False
    improved = False
    for i in range(m - 1):
        a, b = tour[i - 1], tour[i]
        hi = m - 1 if i == 0 else m  # skip the whole-tour reversal
        js = np.arange(i + 1, hi)
        if js.size == 0:
            continue
        c = tour[js]
        nxt = tour[(js + 1) % m]
        delta = D[a, c] + D[b, nxt] - D[a, b] - D[c, nxt]
        k = int(np.argmin(delta))
        if delta[k] < -_EPS:
            j = i + 1 + k
            tour[i : j + 1] = tour[i : j + 1][::-1]
            improved = True
    return improved


def _or_opt_pass(tour: np.ndarray, D: np.ndarray) -> tuple[np.ndarray, bool]:
    improved = False
    for seg_len in (1, 2, 3):
        m = len(tour)
        if m - seg_len < 3:
            continue
        start = 0
        while start + seg_len <= len(tour):
            m = len(tour)
            s0 = tour[start]
            s1 = tour[start + seg_len - 1]
            prev = tour[start - 1]
            nxt = tour[(start + seg_len) % m]
            gain = D[prev, s0] + D[s1, nxt] - D[prev, nxt]
            rest = np.concatenate([tour[:start], tour[start + seg_len :]])
            q = np.roll(rest, -1)
            base = D[rest, q]
            cost_f = D[rest, s0] + D[s1, q] - base
            cost_r = D[rest, s1] + D[s0, q] - base
            kf = int(np.argmin(cost_f))
            kr = int(np.argmin(cost_r))
            forward = cost_f[kf] <= cost_r[kr]
            k, cost = (kf, cost_f[kf]) if forward else (kr, cost_r[kr])
            if cost - gain < -_EPS:
                seg = tour[start : start + seg_len]
                if not forward:
                    seg = seg[::-1]
                tour = np.concatenate([rest[: k + 1], seg, rest[k + 1 :]])
                improved = True
            start += 1
    return tour, improved


def _swap_pass(tour: np.ndarray, D: np.ndarray, unsel: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    """Exchange one selected point for one unselected point, reinserting the
    newcomer at its best edge of the reduced cycle (exact delta, steepest)."""
    improved = False
    while unsel.size and len(tour) >= 3:
        m = len(tour)
        nxt = np.roll(tour, -1)
        base = D[tour, nxt]  # edge p: (tour[p], tour[p+1])
        C = D[tour][:, unsel] + D[nxt][:, unsel] - base[:, None]
        k = min(3, m)
        ids3 = np.argpartition(C, k - 1, axis=0)[:k]
        vals3 = np.take_along_axis(C, ids3, axis=0)
        prev = np.roll(tour, 1)
        gain = D[prev, tour] + base - D[prev, nxt]  # removing tour[p]
        best = (-_EPS, None)
        for p in range(m):
            e1 = (p - 1) % m
            banned = (ids3 == e1) | (ids3 == p)
            valid = np.where(banned, np.inf, vals3).min(axis=0)
            new_edge = D[prev[p], unsel] + D[unsel, nxt[p]] - D[prev[p], nxt[p]]
            delta = np.minimum(valid, new_edge) - gain[p]
            j = int(np.argmin(delta))
            if delta[j] < best[0]:
                at_gap = new_edge[j] <= valid[j]
                edge = -1 if at_gap else int(ids3[int(np.argmin(np.where(banned[:, j], np.inf, vals3[:, j]))), j])
                best = (float(delta[j]), (p, j, edge))
        if best[1] is None:
            break
        p, j, edge = best[1]
        u, v = int(tour[p]), int(unsel[j])
        if edge < 0:
            insert_after_value = int(prev[p])
        else:
            insert_after_value = int(tour[edge])
        reduced = [int(x) for x in tour if x != u]
        pos = reduced.index(insert_after_value)
        reduced.insert(pos + 1, v)
        tour = np.asarray(reduced, dtype=np.int64)
        unsel = unsel.copy()
        unsel[j] = u
        improved = True
    return tour, unsel, improved


def local_search_k_cycle(points: PointSet, m: int, opts: SearchOptions | None = None) -> CycleSolution:
    """Feasible cycle through exactly ``m`` points; its length is a valid
    upper bound on the optimal subset-cycle length."""
    opts = opts or SearchOptions()
    n = len(points)
    if m < 3 or m > n:
        raise InfeasibleError(f"local search needs 3 <= m <= n; got m={m}, n={n}")
    D = distance_matrix(points)
    rng = stream(opts.seed, opts.replicate, lane=1)
    lo = np.asarray(points.region.lower)
    sides = np.asarray(points.region.sides)
    # densest m-clump: the point whose m-th nearest neighbor is closest
    clump = int(np.argmin(np.partition(D, m - 1, axis=1)[:, m - 1]))
    best_order: tuple[int, ...] | None = None
    best_len = math.inf
    for restart in range(opts.restarts):
        if restart == 0:
            anchor = points.coords[clump]
        else:
            anchor = lo + rng.random(points.dim) * sides
        d_anchor = np.sqrt(((points.coords - anchor) ** 2).sum(axis=1))
        subset = np.sort(np.argsort(d_anchor, kind="stable")[:m])
        start = int(subset[int(np.argmin(d_anchor[subset]))])
        tour = _nn_tour(subset, start, D)
        unsel = np.setdiff1d(np.arange(n), subset)
        stagnation = 0
        rounds = 0
        while stagnation < opts.max_stagnation and rounds < opts.max_rounds:
            improved = False
            if opts.two_opt:
                improved |= _two_opt_pass(tour, D)
            if opts.or_opt:
                tour, imp = _or_opt_pass(tour, D)
                improved |= imp
            if opts.swap and unsel.size:
                tour, unsel, imp = _swap_pass(tour, D, unsel)
                if imp and opts.two_opt:
                    _two_opt_pass(tour, D)
                improved |= imp
            rounds += 1
            stagnation = 0 if improved else stagnation + 1
        order = _canonical_cycle([int(i) for i in tour])
        length = path_length(points, order, closed=True)
        if length < best_len:
            best_len = length
            best_order = order
    return CycleSolution(best_order, best_len, m, optimal=False)


# --- origin-path heuristic ----------------------------------------------------


def local_search_origin_path(
    points: PointSet,
    m: int,
    origin: Sequence[float] | None = None,
    opts: SearchOptions | None = None,
) -> PathSolution:
    """Greedy nearest-neighbor chain from the origin through ``m`` points,
    improved by path 2-opt and point swap-out.  Upper bound on the optimum."""
    opts = opts or SearchOptions()
    n = len(points)
    if m < 1 or m > n:
        raise InfeasibleError(f"origin path needs 1 <= m <= n; got m={m}, n={n}")
    coords = points.coords
    o = np.zeros(points.dim) if origin is None else np.asarray(origin, dtype=float)

    selected: list[int] = []
    in_path = np.zeros(n, dtype=bool)
    cur = o
    for _ in range(m):
        d = np.sqrt(((coords - cur) ** 2).sum(axis=1))
        d[in_path] = np.inf
        j = int(np.argmin(d))
        selected.append(j)
        in_path[j] = True
        cur = coords[j]

    def seq_coords(seq: list[int]) -> np.ndarray:
        return np.vstack([o[None, :], coords[seq]])

    improved = True
    rounds = 0
    while improved and rounds < opts.max_rounds:
        improved = False
        rounds += 1
        # path 2-opt: reverse selected[i..j]; the end of the path is free
        if opts.two_opt and m >= 2:
            pts = seq_coords(selected)
            diff = pts[:, None, :] - pts[None, :, :]
            Dp = np.sqrt((diff * diff).sum(axis=2))
            for i in range(m):
                for j in range(i + 1, m):
                    # vertices i..j of `selected` sit at rows i+1..j+1 of pts
                    removed = Dp[i, i + 1]
                    added = Dp[i, j + 1]
                    if j + 1 < m:
                        removed += Dp[j + 1, j + 2]
                        added += Dp[i + 1, j + 2]
                    if added - removed < -_EPS:
                        selected[i:j + 1] = selected[i:j + 1][::-1]
                        improved = True
                        pts = seq_coords(selected)
                        diff = pts[:, None, :] - pts[None, :, :]
                        Dp = np.sqrt((diff * diff).sum(axis=2))
        # swap-out: replace one selected point by a better unselected one
        if opts.swap and m < n:
            for pos in range(m):
                prev = o if pos == 0 else coords[selected[pos - 1]]
                dprev = np.sqrt(((coords - prev) ** 2).sum(axis=1))
                if pos + 1 < m:
                    nxt = coords[selected[pos + 1]]
                    dnxt = np.sqrt(((coords - nxt) ** 2).sum(axis=1))
                else:
                    dnxt = np.zeros(n)
                delta = dprev + dnxt
                u = selected[pos]
                delta -= delta[u]
                delta[in_path] = np.inf
                k = int(np.argmin(delta))
                if delta[k] < -_EPS:
                    in_path[u] = False
                    in_path[k] = True
                    selected[pos] = k
                    improved = True
    length = math.fsum(
        math.dist(a, b) for a, b in zip(seq_coords(selected)[:-1], seq_coords(selected)[1:])
    )
    return PathSolution(tuple(selected), tuple(float(x) for x in o), length, m, optimal=False)


# --- parametric ratio search ---------------------------------------------------


def _single_edge_path(points: PointSet, region: Region, max_interior: int | None) -> RatioPath:
    order = (LOWER_CORNER, UPPER_CORNER)
    length = _corner_path_length(points, region, order)
    return RatioPath(order, length, 1, length, max_interior, optimal=False, points=points, region=region)


def _initial_incumbent(points: PointSet, region: Region, max_interior: int | None) -> RatioPath:
    if region.is_cube():
        greedy = greedy_diagonal(points, region)
        if max_interior is None or len(greedy.interior) <= max_interior:
            if greedy.w <= _single_edge_path(points, region, max_interior).w:
                return RatioPath(
                    greedy.order, greedy.length, greedy.m, greedy.w, max_interior,
                    optimal=False, points=points, region=region,
                )
    return _single_edge_path(points, region, max_interior)


def _dinkelbach_loop(
    incumbent: RatioPath,
    inner: Callable[[float], tuple[RatioPath, float]],
    opts: SearchOptions,
    trace: list[DinkelbachState] | None,
) -> RatioPath:
    """Iterate c <- w(incumbent); ``inner(c)`` returns the transform minimizer
    and its transform value length - c*m + c.  Ratios strictly decrease until
    termination; the terminal transform value is the terminal ratio (>= 0)."""
    c = incumbent.w
    if trace is not None:
        trace.append(DinkelbachState(0, c, incumbent, incumbent.length - c * incumbent.m + c))
    for it in range(1, opts.max_iterations + 1):
        candidate, x_val = inner(c)
        if candidate.w < c - opts.tolerance:
            incumbent = candidate
            c = candidate.w
            if trace is not None:
                trace.append(DinkelbachState(it, c, incumbent, x_val))
        else:
            if trace is not None:
                trace.append(DinkelbachState(it, c, incumbent, x_val))
            break
    return incumbent


def dinkelbach_ratio_path(
    points: PointSet,
    region: Region | None = None,
    max_interior: int | None = None,
    opts: SearchOptions | None = None,
    trace: list[DinkelbachState] | None = None,
    cap: int = DEFAULT_CAP,
) -> RatioPath:
    """Corner-to-corner path of (locally) minimal average edge length.

    The inner transform minimization is exact subset DP when the instance
    fits under ``cap`` (then the result equals the exact optimum), and an
    insert/delete/2-opt local search otherwise.  The returned ratio is an
    upper bound on the true minimum either way.
    """
    opts = opts or SearchOptions()
    region = points.region if region is None else region
    if max_interior is not None and max_interior < 0:
        raise ValueError("max_interior must be >= 0")
    n = len(points)
    incumbent = _initial_incumbent(points, region, max_interior)
    if n == 0 or max_interior == 0:
        # the single diagonal edge is the only feasible path: exactly optimal
        single = _single_edge_path(points, region, max_interior)
        result = RatioPath(
            single.order, single.length, single.m, single.w, max_interior,
            optimal=True, points=points, region=region,
        )
        if trace is not None:
            trace.append(DinkelbachState(0, result.w, result, result.length))
        return result
    exact_inner = n <= cap
    if exact_inner:
        total, parent, pc = _diagonal_tables(points, region, max_interior)
        finite = np.isfinite(total)
        masks, lasts = np.nonzero(finite)
        lengths = total[masks, lasts]
        edge_counts = (pc[masks] + 1).astype(float)
        diag = _single_edge_path(points, region, max_interior)

        def inner(c: float) -> tuple[RatioPath, float]:
            vals = lengths - c * edge_counts
            k = int(np.argmin(vals)) if vals.size else -1
            if k < 0 or diag.length - c <= vals[k]:
                return diag, diag.length - c * diag.m + c
            interior = tuple(_walk(parent, int(masks[k]), int(lasts[k])))
            order = (LOWER_CORNER, *interior, UPPER_CORNER)
            length = _corner_path_length(points, region, order)
            m = len(interior) + 1
            path = RatioPath(
                order, length, m, length / m, max_interior,
                optimal=False, points=points, region=region,
            )
            return path, length - c * m + c

    else:

        def inner(c: float) -> tuple[RatioPath, float]:
            return _heuristic_transform_min(points, region, c, incumbent, max_interior)

    result = _dinkelbach_loop(incumbent, inner, opts, trace)
    if exact_inner:
        result = RatioPath(
            result.order, result.length, result.m, result.w, max_interior,
            optimal=True, points=points, region=region,
        )
    return result


def _heuristic_transform_min(
    points: PointSet,
    region: Region,
    c: float,
    start: RatioPath,
    max_interior: int | None,
) -> tuple[RatioPath, float]:
    """Steepest-descent minimization of length - c*edges + c with insert,
    delete, and 2-opt moves, starting from the incumbent's interior chain."""
    coords = points.coords
    n = len(points)
    lo = region.corner(LOWER_CORNER)
    hi = region.corner(UPPER_CORNER)
    chain = list(start.interior)
    used = np.zeros(n, dtype=bool)
    used[list(chain)] = True

    def chain_pts(seq: list[int]) -> np.ndarray:
        mids = coords[seq] if seq else np.empty((0, points.dim))
        return np.vstack([lo[None, :], mids, hi[None, :]])

    while True:
        pts = chain_pts(chain)
        k = len(chain)
        diff = pts[:, None, :] - pts[None, :, :]
        Dp = np.sqrt((diff * diff).sum(axis=2))
        edge_len = Dp[np.arange(k + 1), np.arange(1, k + 2)]
        best_delta = -_EPS
        best_move = None
        # insert v between chain positions e and e+1
        if (max_interior is None or k < max_interior) and used.sum() < n:
            free_ids = np.nonzero(~used)[0]
            fc = coords[free_ids]
            for e in range(k + 1):
                da = np.sqrt(((fc - pts[e]) ** 2).sum(axis=1))
                db = np.sqrt(((fc - pts[e + 1]) ** 2).sum(axis=1))
                deltas = da + db - edge_len[e] - c
                j = int(np.argmin(deltas))
                if deltas[j] < best_delta:
                    best_delta = float(deltas[j])
                    best_move = ("insert", e, int(free_ids[j]))
        # delete the interior point at position p
        for p in range(k):
            delta = Dp[p, p + 2] - Dp[p, p + 1] - Dp[p + 1, p + 2] + c
            if delta < best_delta:
                best_delta = float(delta)
                best_move = ("delete", p)
        # 2-opt: reverse chain[i..j]
        for i in range(k):
            for j in range(i + 1, k):
                delta = Dp[i, j + 1] + Dp[i + 1, j + 2] - Dp[i, i + 1] - Dp[j + 1, j + 2]
                if delta < best_delta:
                    best_delta = float(delta)
                    best_move = ("reverse", i, j)
        if best_move is None:
            break
        if best_move[0] == "insert":
            _, e, v = best_move
            chain.insert(e, v)
            used[v] = True
        elif best_move[0] == "delete":
            _, p = best_move
            used[chain.pop(p)] = False
        else:
            _, i, j = best_move
            chain[i : j + 1] = chain[i : j + 1][::-1]
    order = (LOWER_CORNER, *chain, UPPER_CORNER)
    length = _corner_path_length(points, region, order)
    m = len(chain) + 1
    path = RatioPath(
        order, length, m, length / m, max_interior, optimal=False, points=points, region=region
    )
    return path, length - c * m + c


# --- greedy diagonal construction ----------------------------------------------


def greedy_length_constant(d: int) -> float:
    """A4 in the greedy-diagonal bound  length <= A4 * ceil(s).

    The per-axis movement telescopes along the walk: corner-to-cube and
    cube-to-cube spans sum to at most s plus one unit per pick, i.e. at most
    2*ceil(s); each edge is at most sqrt(d) times its per-axis span.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    return 2.0 * math.sqrt(d)


def greedy_diagonal(points: PointSet, region: Region | None = None) -> RatioPath:
    """Walk the floor(s) diagonally-adjacent unit cubes of a side-s cube,
    picking the lowest-index point from each nonempty cube, skipping empty
    ones; the corners are prepended and appended."""
    region = points.region if region is None else region
    if not region.is_cube():
        raise ValueError("greedy diagonal path requires a cube region")
    cube_count = math.floor(region.side)
    picks: list[int] = []
    if cube_count >= 1 and len(points):
        rel = points.coords - np.asarray(region.lower)
        cells = np.floor(rel).astype(np.int64)
        on_diag = (cells == cells[:, :1]).all(axis=1)
        c0 = cells[:, 0]
        ok = on_diag & (c0 >= 0) & (c0 < cube_count)
        first_by_cell: dict[int, int] = {}
        for i in np.nonzero(ok)[0]:
            cell = int(c0[i])
            if cell not in first_by_cell:
                first_by_cell[cell] = int(i)
        picks = [first_by_cell[cell] for cell in sorted(first_by_cell)]
    order = (LOWER_CORNER, *picks, UPPER_CORNER)
    length = _corner_path_length(points, region, order)
    m = len(picks) + 1
    return RatioPath(order, length, m, length / m, None, optimal=False, points=points, region=region)


# --- concatenation ---------------------------------------------------------------


def concatenate_paths(parts: Sequence[RatioPath], layout: Sequence[Region]) -> RatioPath:
    """Join corner-to-corner paths over diagonally adjacent regions.

    The last edge of each part and the first edge of the next are replaced by
    one edge through the shared corner's neighbors, so the edge count is
    sum(m_i) - (k-1) and the length can only shrink (triangle inequality).
    """
    if not parts:
        raise ValueError("need at least one path to concatenate")
    if len(parts) != len(layout):
        raise ValueError("one layout region per path part is required")
    for part, reg in zip(parts, layout):
        if part.points is None or part.region is None:
            raise ValueError("parts must carry their point set and region")
        if part.region != reg:
            raise ValueError("part does not span its layout region's diagonal")
    for a, b in zip(layout[:-1], layout[1:]):
        if a.upper != b.lower:
            raise ValueError("layout regions must share the meeting corner")
    dim = layout[0].dim
    blocks = [
        part.points.coords[list(part.interior)]
        for part in parts
        if part.interior
    ]
    coords = np.vstack(blocks) if blocks else np.empty((0, dim))
    lower = layout[0].lower
    upper = layout[-1].upper
    bbox = Region(lower, tuple(u - l for u, l in zip(upper, lower)))
    merged = PointSet(dim, coords, bbox, Provenance("derived", len(coords), 0, 0))
    order = (LOWER_CORNER, *range(len(coords)), UPPER_CORNER)
    length = _corner_path_length(merged, bbox, order)
    m = len(coords) + 1
    expected_m = sum(p.m for p in parts) - (len(parts) - 1)
    if m != expected_m:
        raise AssertionError("edge-count bookkeeping violated")
    total = math.fsum(p.length for p in parts)
    if length > total + 1e-9:
        raise AssertionError("concatenation must not lengthen the path")
    return RatioPath(order, length, m, length / m, None, optimal=False, points=merged, region=bbox)


# --- oriented variant (d = 2) ------------------------------------------------------


_ORIENTED_CACHE_LIMIT = 4500


def oriented_path_search(
    points: PointSet,
    region: Region | None = None,
    opts: SearchOptions | None = None,
    trace: list[DinkelbachState] | None = None,
) -> RatioPath:
    """Minimum average edge-length corner-to-corner path whose edges all move
    strictly upward in the second coordinate (plane only).

    The precedence order makes the transform minimization a DAG shortest-path
    DP over points sorted by the second coordinate, so the inner step is
    exact and the outer iteration converges to the true oriented optimum.
    """
    opts = opts or SearchOptions()
    region = points.region if region is None else region
    if points.dim != 2:
        raise UnsupportedDimensionError("the oriented variant is defined for d=2 only")
    lo = region.corner(LOWER_CORNER)
    hi = region.corner(UPPER_CORNER)
    n = len(points)
    incumbent = _initial_incumbent(points, region, None)
    if n == 0:
        return RatioPath(
            incumbent.order, incumbent.length, incumbent.m, incumbent.w, None,
            optimal=True, points=points, region=region,
        )
    ys = points.coords[:, 1]
    sort_idx = np.argsort(ys, kind="stable")
    sc = points.coords[sort_idx]
    ys_sorted = ys[sort_idx]
    # strict precedence: predecessors of i are sorted positions with y < y_i
    pred_count = np.searchsorted(ys_sorted, ys_sorted, side="left")
    base_in = np.sqrt(((sc - lo) ** 2).sum(axis=1))
    base_out = np.sqrt(((sc - hi) ** 2).sum(axis=1))
    diag_len = math.dist(lo, hi)
    cache_rows = n <= _ORIENTED_CACHE_LIMIT
    rows: list[np.ndarray | None] = [None] * n
    if cache_rows:
        for i in range(n):
            k = int(pred_count[i])
            rows[i] = np.sqrt(((sc[:k] - sc[i]) ** 2).sum(axis=1)) if k else None

    def inner(c: float) -> tuple[RatioPath, float]:
        g = np.empty(n)
        par = np.full(n, -1, dtype=np.int64)
        for i in range(n):
            k = int(pred_count[i])
            best = base_in[i]
            if k:
                row = rows[i]
                if row is None:
                    row = np.sqrt(((sc[:k] - sc[i]) ** 2).sum(axis=1))
                vals = g[:k] + row
                j = int(np.argmin(vals))
                if vals[j] < best:
                    best = vals[j]
                    par[i] = j
            g[i] = best - c
        end_vals = g + base_out
        k_end = int(np.argmin(end_vals))
        if end_vals[k_end] >= diag_len:
            path = _single_edge_path(points, region, None)
            return path, diag_len
        seq: list[int] = []
        i = k_end
        while i >= 0:
            seq.append(i)
            i = int(par[i])
        seq.reverse()
        interior = tuple(int(sort_idx[i]) for i in seq)
        order = (LOWER_CORNER, *interior, UPPER_CORNER)
        length = _corner_path_length(points, region, order)
        m = len(interior) + 1
        path = RatioPath(order, length, m, length / m, None, optimal=False, points=points, region=region)
        return path, float(end_vals[k_end])

    result = _dinkelbach_loop(incumbent, inner, opts, trace)
    return RatioPath(
        result.order, result.length, result.m, result.w, None,
        optimal=True, points=points, region=region,
    )
