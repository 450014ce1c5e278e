import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meanpath.exact import exact_diagonal_ratio, exact_k_cycle, exact_origin_path
from meanpath.points import (
    LOWER_CORNER,
    UPPER_CORNER,
    PointSet,
    Provenance,
    Region,
    sample_poisson,
    sample_uniform,
)
from meanpath.search import (
    DinkelbachState,
    SearchOptions,
    UnsupportedDimensionError,
    concatenate_paths,
    dinkelbach_ratio_path,
    greedy_diagonal,
    greedy_length_constant,
    local_search_k_cycle,
    local_search_origin_path,
    oriented_path_search,
    trace_csv,
)
from conftest import make_points, random_instance
from oracles import brute_oriented_ratio


def _poisson_cube(s, seed, d=2, replicate=0):
    return sample_poisson(Region.cube(float(s), d), 1.0, seed=seed, replicate=replicate)


class TestLocalSearchCycle:
    def test_square_corners_full_tour(self, unit_square_corners):
        sol = local_search_k_cycle(unit_square_corners, 4, SearchOptions(seed=1))
        assert sol.length == 4.0
        assert not sol.optimal

    def test_never_below_exact_and_mostly_equal(self):
        equal = total = 0
        for d in (2, 3):
            for i in range(100):
                seed = hash(("ls", d, i)) % (2**31)
                ps = random_instance(seed, d=d, n_min=3, n_max=9)
                m = 3 + seed % (len(ps) - 2) if len(ps) > 3 else 3
                exact = exact_k_cycle(ps, m)
                heur = local_search_k_cycle(ps, m, SearchOptions(seed=seed))
                assert heur.length >= exact.length - 1e-12
                assert heur.m == m and len(set(heur.selected)) == m
                total += 1
                equal += heur.length == exact.length
        assert total == 200
        assert equal / total >= 0.95

    def test_deterministic_given_options(self):
        ps = sample_uniform(40, Region.cube(6.0, 2), seed=3)
        a = local_search_k_cycle(ps, 15, SearchOptions(seed=9, replicate=4))
        b = local_search_k_cycle(ps, 15, SearchOptions(seed=9, replicate=4))
        assert a.selected == b.selected and a.length == b.length

    def test_move_flags_validated(self):
        with pytest.raises(ValueError):
            SearchOptions(two_opt=False, or_opt=False, swap=False)
        with pytest.raises(ValueError):
            SearchOptions(restarts=0)


class TestDinkelbach:
    def test_empty_interior_returns_single_edge(self):
        ps = make_points(np.empty((0, 2)), side=2.0)
        sol = dinkelbach_ratio_path(ps)
        assert sol.m == 1 and sol.w == 2.0 * math.sqrt(2.0)

    def test_exact_inner_matches_exact_solver(self):
        matched = 0
        for d in (2, 3):
            for i in range(100):
                seed = hash(("dk", d, i)) % (2**31)
                ps = random_instance(seed, d=d, n_min=0, n_max=9)
                exact = exact_diagonal_ratio(ps)
                dk = dinkelbach_ratio_path(ps)
                assert dk.w == exact.w, (d, i)
                assert dk.optimal
                matched += 1
        assert matched == 200

    def test_iterate_ratios_strictly_decrease(self):
        checked = 0
        for i in range(100):
            seed = hash(("dk-trace", i)) % (2**31)
            ps = random_instance(seed, n_min=1, n_max=9)
            trace: list[DinkelbachState] = []
            dinkelbach_ratio_path(ps, trace=trace)
            ws = [st_.incumbent.w for st_ in trace]
            # strictly decreasing until the terminal (non-improving) record
            for a, b in zip(ws[:-1], ws[1:-1]):
                assert b < a
            assert ws[-1] <= ws[0]
            # nonincreasing incumbents including the terminal record
            for a, b in zip(ws, ws[1:]):
                assert b <= a
            checked += 1
        assert checked == 100

    def test_terminal_transform_value_nonnegative(self):
        for i in range(40):
            seed = hash(("dk-x", i)) % (2**31)
            ps = random_instance(seed, n_min=0, n_max=9)
            trace: list[DinkelbachState] = []
            dinkelbach_ratio_path(ps, trace=trace)
            assert trace[-1].transform_value >= -1e-9

    def test_heuristic_inner_never_below_exact(self):
        # force the heuristic inner solver by dropping the cap to zero
        for i in range(50):
            seed = hash(("dk-heur", i)) % (2**31)
            ps = random_instance(seed, n_min=1, n_max=9)
            exact = exact_diagonal_ratio(ps)
            heur = dinkelbach_ratio_path(ps, cap=0)
            assert heur.w >= exact.w - 1e-12
            assert not heur.optimal

    def test_constrained_interior_count(self):
        ps = _poisson_cube(3.0, seed=11)
        for k in (0, 1, 2):
            sol = dinkelbach_ratio_path(ps, max_interior=k)
            assert len(sol.interior) <= k

    def test_heuristic_scale_run_is_deterministic(self):
        ps = _poisson_cube(8.0, seed=2)
        assert len(ps) > 18
        t1: list[DinkelbachState] = []
        a = dinkelbach_ratio_path(ps, trace=t1)
        b = dinkelbach_ratio_path(ps)
        assert a.order == b.order and a.w == b.w
        ws = [st_.incumbent.w for st_ in t1]
        assert all(y <= x for x, y in zip(ws, ws[1:]))

    def test_trace_csv_rendering(self):
        ps = _poisson_cube(3.0, seed=4)
        trace: list[DinkelbachState] = []
        dinkelbach_ratio_path(ps, trace=trace)
        text = trace_csv(trace)
        lines = text.splitlines()
        assert lines[0] == "iteration,c,length,m,w"
        assert len(lines) == len(trace) + 1


class TestGreedyDiagonal:
    def test_collinear_centers(self):
        ps = make_points([[0.5, 0.5], [1.5, 1.5], [2.5, 2.5]], side=3.0)
        sol = greedy_diagonal(ps)
        assert sol.m == 4
        assert sol.length == pytest.approx(3.0 * math.sqrt(2.0), abs=1e-12)
        assert sol.w == pytest.approx(3.0 * math.sqrt(2.0) / 4.0, abs=1e-12)

    def test_all_cubes_empty(self):
        ps = make_points(np.empty((0, 2)), side=2.0)
        sol = greedy_diagonal(ps)
        assert sol.m == 1 and sol.w == 2.0 * math.sqrt(2.0)

    def test_picks_lowest_index_and_skips_empties(self):
        coords = [[2.5, 2.5], [0.2, 0.3], [0.7, 0.1], [2.2, 2.9]]
        ps = make_points(coords, side=3.0)
        sol = greedy_diagonal(ps)
        # cube 0 holds points 1 and 2 (1 wins), cube 1 is empty, cube 2 holds
        # points 0 and 3 (0 wins)
        assert sol.interior == (1, 0)

    def test_occupancy_binomial_mean(self):
        # nonempty-cube count over rate-1 Poisson ~ Binomial(floor(s), 1-1/e)
        s, reps = 50.0, 10_000
        vals = np.empty(reps)
        for r in range(reps):
            ps = _poisson_cube(s, seed=6, replicate=r)
            vals[r] = (greedy_diagonal(ps).m - 1) / math.floor(s)
        target = 1.0 - math.exp(-1.0)
        se = vals.std(ddof=1) / math.sqrt(reps)
        assert abs(vals.mean() - target) <= 3 * se

    def test_length_bound(self):
        # length <= A4 * ceil(s) with the documented constant, on random draws
        for d in (2, 3):
            a4 = greedy_length_constant(d)
            for i in range(40):
                s = 1.0 + (i % 7) + 0.5 * (i % 2)
                ps = _poisson_cube(s, seed=hash(("a4", d, i)) % (2**31), d=d)
                sol = greedy_diagonal(ps)
                assert sol.length <= a4 * math.ceil(s) + 1e-12

    def test_non_cube_rejected(self):
        ps = PointSet(
            2, np.empty((0, 2)), Region((0.0, 0.0), (1.0, 2.0)), Provenance("file", 0, 0, 0)
        )
        with pytest.raises(ValueError):
            greedy_diagonal(ps)


class TestConcatenate:
    def _diag_parts(self, seed, k=2, s=1.0, d=2):
        parts, layout = [], []
        for j in range(k):
            corner = j * s
            region = Region((corner,) * d, (s,) * d)
            ps = sample_poisson(region, 1.0, seed=seed, replicate=j)
            parts.append(exact_diagonal_ratio(ps, region))
            layout.append(region)
        return parts, layout

    def test_collinear_equality(self):
        r1 = Region.cube(1.0, 2)
        r2 = Region((1.0, 1.0), (1.0, 1.0))
        p1 = PointSet(2, np.array([[0.5, 0.5]]), r1, Provenance("file", 1, 0, 0))
        p2 = PointSet(2, np.array([[1.5, 1.5]]), r2, Provenance("file", 1, 0, 0))
        a = exact_diagonal_ratio(p1, r1)
        b = exact_diagonal_ratio(p2, r2)
        joined = concatenate_paths([a, b], [r1, r2])
        assert joined.m == 3
        assert joined.length == 2.0 * math.sqrt(2.0)

    def test_edge_count_identity_and_length_inequality(self):
        strict = 0
        for i in range(100):
            parts, layout = self._diag_parts(hash(("concat", i)) % (2**31), k=2, s=2.0)
            joined = concatenate_paths(parts, layout)
            assert joined.m == sum(p.m for p in parts) - 1
            total = parts[0].length + parts[1].length
            assert joined.length <= total + 1e-9
            # strict drop whenever the shared corner is off the joining line
            a = (
                parts[0].points.coords[parts[0].interior[-1]]
                if parts[0].interior
                else np.asarray(layout[0].lower)
            )
            b = (
                parts[1].points.coords[parts[1].interior[0]]
                if parts[1].interior
                else np.asarray(layout[1].upper)
            )
            corner = np.asarray(layout[0].upper)
            cross = (corner[0] - a[0]) * (b[1] - a[1]) - (corner[1] - a[1]) * (b[0] - a[0])
            if abs(cross) > 1e-9:
                assert joined.length < total
                strict += 1
        assert strict >= 90  # collinear corners are measure-zero

    def test_longer_chains(self):
        parts, layout = self._diag_parts(77, k=4, s=1.5)
        joined = concatenate_paths(parts, layout)
        assert joined.m == sum(p.m for p in parts) - 3
        assert joined.length <= math.fsum(p.length for p in parts) + 1e-9

    def test_non_adjacent_layout_rejected(self):
        r1 = Region.cube(1.0, 2)
        r3 = Region((2.0, 2.0), (1.0, 1.0))
        p1 = exact_diagonal_ratio(
            PointSet(2, np.empty((0, 2)), r1, Provenance("file", 0, 0, 0)), r1
        )
        p3 = exact_diagonal_ratio(
            PointSet(2, np.empty((0, 2)), r3, Provenance("file", 0, 0, 0)), r3
        )
        with pytest.raises(ValueError):
            concatenate_paths([p1, p3], [r1, r3])


class TestOrientedPath:
    def test_diagonal_points_match_unrestricted(self):
        ps = make_points([[0.4, 0.4], [1.3, 1.3], [2.2, 2.2]], side=3.0)
        oriented = oriented_path_search(ps)
        unrestricted = exact_diagonal_ratio(ps)
        assert oriented.w == unrestricted.w

    def test_matches_brute_force_over_upward_subsequences(self):
        for i in range(60):
            seed = hash(("oriented", i)) % (2**31)
            ps = random_instance(seed, n_min=0, n_max=9)
            sol = oriented_path_search(ps)
            expected = brute_oriented_ratio(ps.coords, ps.region.lower, ps.region.upper)
            assert sol.w == expected, seed
            assert sol.optimal

    def test_interior_is_strictly_upward(self):
        ps = _poisson_cube(6.0, seed=8)
        sol = oriented_path_search(ps)
        ys = [ps.coords[i][1] for i in sol.interior]
        assert all(b > a for a, b in zip(ys, ys[1:]))

    def test_unsupported_dimension(self):
        ps = sample_uniform(4, Region.cube(1.0, 3), seed=0)
        with pytest.raises(UnsupportedDimensionError):
            oriented_path_search(ps)

    def test_never_below_unrestricted_optimum(self):
        for i in range(30):
            seed = hash(("oriented-vs", i)) % (2**31)
            ps = random_instance(seed, n_min=0, n_max=9)
            assert oriented_path_search(ps).w >= exact_diagonal_ratio(ps).w - 1e-12


class TestOriginPathHeuristic:
    def test_never_below_exact(self):
        for i in range(60):
            seed = hash(("t-heur", i)) % (2**31)
            ps = random_instance(seed, n_min=1, n_max=9)
            m = 1 + seed % len(ps)
            exact = exact_origin_path(ps, m)
            heur = local_search_origin_path(ps, m)
            assert heur.length >= exact.length - 1e-12
            assert heur.m == m and len(set(heur.order)) == m


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_heuristic_cycle_feasibility_property(seed):
    ps = random_instance(seed, n_min=4, n_max=9)
    m = 3 + seed % (len(ps) - 2)
    sol = local_search_k_cycle(ps, m, SearchOptions(seed=seed))
    assert sol.m == m
    assert len(set(sol.selected)) == m
    assert all(0 <= i < len(ps) for i in sol.selected)
    assert sol.length >= exact_k_cycle(ps, m).length - 1e-12
