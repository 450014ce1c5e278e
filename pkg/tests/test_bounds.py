import math

import mpmath
import pytest

from meanpath.bounds import (
    BoundResult,
    bound_csv_row,
    brw_lower_bound,
    finite_s_upper_bound,
    unit_ball_volume,
)


class TestUnitBallVolume:
    def test_small_dimensions(self):
        # interval [-1,1], unit disk, unit ball; 1e-12 relative contract
        assert unit_ball_volume(1) == pytest.approx(2.0, rel=1e-12)
        assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-12)
        assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)

    def test_high_precision_reference(self):
        mpmath.mp.dps = 50
        for d in range(1, 16):
            ref = float(mpmath.pi ** (d / 2) / mpmath.gamma(1 + mpmath.mpf(d) / 2))
            assert abs(unit_ball_volume(d) - ref) <= 1e-12 * ref

    def test_recursion(self):
        # v_d = v_{d-2} * 2*pi/d
        for d in range(3, 21):
            lhs = unit_ball_volume(d)
            rhs = unit_ball_volume(d - 2) * 2.0 * math.pi / d
            assert abs(lhs - rhs) <= 1e-10 * rhs

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            unit_ball_volume(0)


class TestClosedFormLowerBound:
    def test_plane_value(self):
        b = brw_lower_bound(2)
        assert abs(b.value - 1.0 / (2.0 * math.pi * math.e)) <= 1e-15
        assert abs(b.value - 0.05854983) <= 1e-6
        assert b.auxiliary["lambda_star"] == pytest.approx(2.0 * math.pi * math.e, rel=1e-12)
        assert b.target == "c0plus" and b.direction == "lower" and b.derivation == "closed_form"

    def test_three_dimensions_high_precision(self):
        # closed form with Gamma(4) = 6 and v_3 = 4*pi/3 gives 2/(e*sqrt(8*pi));
        # evaluated at 50 digits this is 0.14676266..., the frozen reference
        mpmath.mp.dps = 50
        ref = float(2 / (mpmath.e * mpmath.sqrt(8 * mpmath.pi)))
        b = brw_lower_bound(3)
        assert abs(b.value - ref) <= 1e-12 * ref
        assert b.value == pytest.approx(0.1467626631737399, abs=1e-12)

    def test_strictly_positive(self):
        for d in range(2, 16):
            assert brw_lower_bound(d).value > 0.0

    def test_optimality_identity(self):
        # at lambda* = (d-1)/value:  e^{lambda*c} * v_d * Gamma(d+1) / lambda*^{d-1} = 1
        for d in range(2, 11):
            b = brw_lower_bound(d)
            lam = b.auxiliary["lambda_star"]
            h = (
                math.exp(lam * b.value)
                * unit_ball_volume(d)
                * math.gamma(d + 1)
                / lam ** (d - 1)
            )
            assert abs(h - 1.0) <= 1e-9

    def test_lambda_star_consistency(self):
        for d in range(2, 11):
            b = brw_lower_bound(d)
            assert b.auxiliary["lambda_star"] == (d - 1) / b.value

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            brw_lower_bound(1)


class TestFiniteSUpperBound:
    def test_degenerate_equal_replicates(self):
        b = finite_s_upper_bound([(2.0, 1.0, [12.0, 12.0, 12.0])], dimension=2)
        assert b.value == 12.0 / 4.0
        assert b.auxiliary["ci_half_width"] == 0.0
        assert b.target == "delta_c_delta" and b.direction == "upper"

    def test_min_of_group_means(self):
        samples = [
            (1.0, 0.5, [10.0, 10.0]),
            (1.0, 0.5, [8.0, 8.0]),
            (1.0, 0.5, [9.0, 9.0]),
        ]
        b = finite_s_upper_bound(samples, dimension=2)
        assert b.value == 8.0
        assert b.derivation == "finite_s_mean"
        assert b.auxiliary["upper_cl"] >= b.value

    def test_confidence_limit_grows_with_level(self):
        samples = [(2.0, 1.0, [7.0, 9.0, 8.0, 8.5])]
        lo = finite_s_upper_bound(samples, dimension=2, level=0.9)
        hi = finite_s_upper_bound(samples, dimension=2, level=0.999)
        assert hi.auxiliary["ci_half_width"] > lo.auxiliary["ci_half_width"]
        assert hi.value == lo.value

    def test_heuristic_inputs_flagged(self):
        b = finite_s_upper_bound([(1.0, 1.0, [3.0, 4.0])], dimension=2, solver="heuristic")
        assert b.auxiliary["heuristic"] == 1.0

    def test_errors(self):
        with pytest.raises(ValueError):
            finite_s_upper_bound([], dimension=2)
        with pytest.raises(ValueError):
            finite_s_upper_bound([(1.0, 1.0, [3.0])], dimension=2)
        with pytest.raises(ValueError):
            finite_s_upper_bound(
                [(1.0, 1.0, [3.0, 4.0]), (2.0, 0.5, [3.0, 4.0])], dimension=2
            )

    def test_lower_bound_sits_below_synthetic_upper(self):
        lower = brw_lower_bound(2).value
        upper = finite_s_upper_bound([(3.0, 1.0, [7.0, 8.0])], dimension=2).value
        assert lower < upper


class TestBoundResult:
    def test_positive_value_required(self):
        with pytest.raises(ValueError):
            BoundResult("c0plus", "lower", 2, -1.0, {"lambda_star": -1.0}, "closed_form")

    def test_closed_form_requires_lambda_star(self):
        with pytest.raises(ValueError):
            BoundResult("c0plus", "lower", 2, 0.5, {}, "closed_form")

    def test_csv_row(self):
        row = bound_csv_row(brw_lower_bound(2))
        assert row.startswith("c0plus,lower,2,,0.058549831524319")
        assert row.endswith(",closed_form")
