import math

import numpy as np
import pytest

from gexpect.errors import DimensionMismatch, GExpectError
from gexpect.expectation import (GNormal, LinearImage, Maximal, Sequential,
                                 convex_oracle_1d, expect, expect_gnormal,
                                 expect_maximal, expect_sequential,
                                 gauss_hermite_expectation,
                                 gauss_hermite_expectation_nd,
                                 lower_expectation, mean_certainty_check)
from gexpect.gamma import (DiagonalBox, Interval1D, RankOneFamily,
                           UncertaintyInterval, rank_one_gamma)
from gexpect.pde import SolverConfig
from gexpect.testfuncs import (ABS, NEG_SQUARE, POS_PART, SQUARE, QUARTIC,
                               XY_SQUARED, YX_SQUARED, TestFunction)

IV = UncertaintyInterval(1.0, 4.0)
FAST = SolverConfig(h=0.2, refine=None)

# frozen closed forms for sigma_high = 2: E|2Z| = 2 sqrt(2/pi), E[(2Z)^+] = 2/sqrt(2pi)
ABS_MOMENT = 1.5957691216057308
POS_MOMENT = 0.7978845608028654
# (sigma2_high^2 - sigma2_low^2) * sigma1_high / sqrt(2 pi) for [1,4] twice
THIRD_MOMENT = 2.3936536518199186


class TestOracles:
    def test_quadrature_matches_closed_forms(self):
        assert gauss_hermite_expectation(lambda x: x**2, 2.0) == pytest.approx(4.0, rel=1e-12)
        assert gauss_hermite_expectation_nd(lambda x, y: x**2 * y**2, [1.0, 2.0]) == \
            pytest.approx(4.0, rel=1e-10)

    def test_convex_oracle_values(self):
        assert convex_oracle_1d(IV, SQUARE) == pytest.approx(4.0, rel=1e-10)
        assert convex_oracle_1d(IV, QUARTIC) == pytest.approx(48.0, rel=1e-10)
        assert convex_oracle_1d(IV, ABS) == pytest.approx(ABS_MOMENT, rel=1e-4)
        assert convex_oracle_1d(IV, POS_PART) == pytest.approx(POS_MOMENT, rel=1e-4)
        assert convex_oracle_1d(IV, NEG_SQUARE) == pytest.approx(-1.0, rel=1e-10)

    def test_convex_oracle_needs_tagged_function(self):
        untagged = TestFunction(np.sin, arity=1, growth_order=0, growth_const=2.0)
        with pytest.raises(GExpectError):
            convex_oracle_1d(IV, untagged)


class TestExpectGNormal:
    def test_interval_moments(self):
        up = expect_gnormal(Interval1D(IV), SQUARE, cfg=FAST)
        assert up.value == pytest.approx(4.0, rel=1e-6)
        assert up.method == "pde"
        assert expect_gnormal(Interval1D(IV), ABS, cfg=FAST).value == \
            pytest.approx(ABS_MOMENT, abs=2e-3)

    def test_rank_one_reduces_to_ray(self):
        fam = rank_one_gamma([3.0, 4.0], [1.0], UncertaintyInterval(1.0, 1.0))
        phi = TestFunction(lambda x, y: x * y, arity=2, growth_order=1,
                           growth_const=8.0, name="")
        # E[(3S)(4S)] = 12 E[S^2] = 12 for S ~ N(0, 1)
        res = expect_gnormal(fam, phi, cfg=FAST)
        assert res.value == pytest.approx(12.0, rel=1e-6)

    def test_arity_mismatch(self):
        with pytest.raises(DimensionMismatch):
            expect_gnormal(Interval1D(IV), XY_SQUARED, cfg=FAST)


class TestExpectSequential:
    def test_third_moments(self):
        zero = expect_sequential((IV, IV), YX_SQUARED, cfg=FAST)
        pos = expect_sequential((IV, IV), XY_SQUARED, cfg=FAST)
        assert abs(zero.value) < 1e-10
        assert pos.value == pytest.approx(THIRD_MOMENT, abs=1e-2)
        assert pos.method == "nested"

    def test_order_reverses_roles(self):
        rev = expect_sequential((IV, IV.scaled(2.0)), XY_SQUARED, order=(1, 0), cfg=FAST)
        # with order (1, 0) the squared variable is integrated first
        assert abs(rev.value) < 1e-10

    def test_validation(self):
        with pytest.raises(DimensionMismatch):
            expect_sequential((IV,), XY_SQUARED, cfg=FAST)
        with pytest.raises(ValueError):
            expect_sequential((IV, IV), XY_SQUARED, order=(0, 0), cfg=FAST)
        with pytest.raises(DimensionMismatch):
            expect_sequential((IV,) * 4,
                              TestFunction(lambda *c: sum(c), arity=4, growth_order=1,
                                           growth_const=4.0), cfg=FAST)


class TestExpectMaximal:
    def test_points_take_sup(self):
        res = expect_maximal(Maximal(points=[[-2.0], [1.0]]), SQUARE)
        assert res.value == 4.0
        assert res.error_estimate == 0.0

    def test_box_grid_search(self):
        res = expect_maximal(Maximal(box=[(-1.0, 2.0)]),
                             TestFunction(lambda x: -(x - 0.3) ** 2, arity=1,
                                          growth_order=1, growth_const=8.0))
        assert res.value == pytest.approx(0.0, abs=1e-6)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            Maximal()
        with pytest.raises(ValueError):
            Maximal(points=[[1.0]], box=[(0.0, 1.0)])


class TestExpectDispatch:
    def test_gnormal_and_sequential(self):
        assert expect(GNormal(Interval1D(IV)), SQUARE, cfg=FAST).value == \
            pytest.approx(4.0, rel=1e-6)
        assert expect(Sequential((IV, IV)), XY_SQUARED, cfg=FAST).value == \
            pytest.approx(THIRD_MOMENT, abs=1e-2)

    def test_linear_image_of_gnormal_scales(self):
        spec = LinearImage(np.array([[3.0]]), GNormal(Interval1D(IV)))
        assert expect(spec, SQUARE, cfg=FAST).value == pytest.approx(36.0, rel=1e-6)

    def test_linear_image_composition(self):
        inner = LinearImage(np.array([[2.0]]), GNormal(Interval1D(IV)))
        spec = LinearImage(np.array([[3.0]]), inner)
        assert expect(spec, SQUARE, cfg=FAST).value == pytest.approx(144.0, rel=1e-6)

    def test_linear_image_of_sequential_pulls_back(self):
        # (Y1 + Y2) ~ 1D G-normal with variance interval [2, 8]
        spec = LinearImage(np.array([[1.0, 1.0]]), Sequential((IV, IV)))
        assert expect(spec, SQUARE, cfg=FAST).value == pytest.approx(8.0, rel=1e-5)

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            expect(GNormal(Interval1D(IV)), XY_SQUARED, cfg=FAST)


def test_lower_expectation_is_conjugate():
    lo = lower_expectation(GNormal(Interval1D(IV)), SQUARE, cfg=FAST)
    assert lo.value == pytest.approx(1.0, rel=1e-6)
    up = expect(GNormal(Interval1D(IV)), SQUARE, cfg=FAST)
    assert lo.value <= up.value


def test_mean_certainty_check():
    psi = TestFunction(lambda x: x**2, arity=1, growth_order=1, growth_const=6.0,
                       tags={"convex"}, name="x^2")
    report = mean_certainty_check(Sequential((IV, IV)), psi, alpha=2.0, cfg=FAST)
    assert report.passed
    assert report.with_term == pytest.approx(report.without_term, abs=report.tolerance)
