import math

import numpy as np
import pytest

from gexpect.errors import CFLViolation, DimensionMismatch, GExpectError
from gexpect.gamma import ConvexHull, DiagonalBox, UncertaintyInterval
from gexpect.pde import (GridSpec, SolverConfig, build_grid, diffuse_last_axis,
                         solve_gheat_1d, solve_gheat_diag, solve_gheat_hull,
                         step_diag)
from gexpect.testfuncs import (ABS, IDENTITY, NEG_SQUARE, QUARTIC, SQUARE,
                               XY, XY_SQUARED, TestFunction)

IV = UncertaintyInterval(1.0, 4.0)
FAST = SolverConfig(h=0.2, refine=None)


class TestGridSpec:
    def test_axis_centered_at_zero(self):
        g = GridSpec(half_width=(2.0,), h=0.25, dims=1, time_horizon=1.0, dt=0.01)
        ax = g.axis(0)
        assert ax.size == 17
        assert ax[(ax.size - 1) // 2] == 0.0

    def test_half_width_multiple_of_h(self):
        with pytest.raises(ValueError, match="multiple"):
            GridSpec(half_width=(2.1,), h=0.25, dims=1, time_horizon=1.0, dt=0.01)
        with pytest.raises(ValueError, match="multiple"):
            # fewer than 8 cells per side
            GridSpec(half_width=(1.0,), h=0.25, dims=1, time_horizon=1.0, dt=0.01)

    def test_steps_cover_horizon(self):
        g = GridSpec(half_width=(2.0,), h=0.25, dims=1, time_horizon=1.0, dt=0.3)
        assert g.steps == 4


class TestBuildGrid:
    def test_domain_covers_tails(self):
        g = build_grid([4.0], SQUARE, 1.0, None, SolverConfig())
        assert g.half_width[0] >= 8.0 * 2.0  # 8 sigma_high
        assert g.dt <= 0.4 * g.h * g.h / 4.0 + 1e-15

    def test_overrides_respected(self):
        g = build_grid([4.0], SQUARE, 1.0, None, SolverConfig(h=0.5, half_width=20.0))
        assert g.h == 0.5
        assert g.half_width == (20.0, 20.0) or g.half_width == (20.0,)

    def test_zero_variance_rejected(self):
        with pytest.raises(GExpectError):
            build_grid([0.0], SQUARE, 1.0, None, SolverConfig())


class TestSolve1D:
    def test_upper_and_lower_variance(self):
        up = solve_gheat_1d(IV, SQUARE, 1.0, cfg=FAST)
        lo = solve_gheat_1d(IV, NEG_SQUARE, 1.0, cfg=FAST)
        assert up.value_at_origin == pytest.approx(4.0, rel=1e-6)
        assert -lo.value_at_origin == pytest.approx(1.0, rel=1e-6)

    def test_linear_data_is_invariant(self):
        rep = solve_gheat_1d(IV, IDENTITY, 1.0, cfg=FAST)
        assert abs(rep.value_at_origin) < 1e-12

    def test_quartic_moment(self):
        rep = solve_gheat_1d(IV, QUARTIC, 1.0, cfg=SolverConfig(refine=None))
        assert rep.value_at_origin == pytest.approx(48.0, rel=2e-3)

    def test_shifted_start_and_time_scaling(self):
        # u(t, x0) = E[(x0 + sqrt(t) X)^2] = x0^2 + t sigma_high^2; x0 on-grid
        rep = solve_gheat_1d(IV, SQUARE, 0.5, x0=1.6, cfg=FAST)
        assert rep.value_at_origin == pytest.approx(1.6**2 + 0.5 * 4.0, rel=1e-5)

    def test_t_zero_returns_initial(self):
        rep = solve_gheat_1d(IV, SQUARE, 0.0, x0=3.0, cfg=FAST)
        assert rep.value_at_origin == 9.0
        assert rep.steps_taken == 0

    def test_degenerate_flagged(self):
        rep = solve_gheat_1d(UncertaintyInterval(0.0, 4.0), SQUARE, 1.0, cfg=FAST)
        assert rep.degenerate

    def test_refinement_delta_reported(self):
        rep = solve_gheat_1d(IV, ABS, 1.0, cfg=SolverConfig(h=0.2))
        assert rep.refinement_delta is not None
        assert rep.refinement_delta < 0.05


class TestSolveDiag:
    def test_separable_sum(self):
        box = DiagonalBox((IV, IV.scaled(2.0)))
        phi = TestFunction(lambda x, y: x**2 + y**2, arity=2, growth_order=1,
                           growth_const=8.0, tags={"convex"}, name="")
        rep = solve_gheat_diag(box, phi, 1.0, cfg=FAST)
        assert rep.value_at_origin == pytest.approx(4.0 + 8.0, rel=1e-6)

    def test_dimension_cap(self):
        box = DiagonalBox((IV,) * 4)
        phi = TestFunction(lambda *c: sum(c), arity=4, growth_order=1,
                           growth_const=4.0, name="")
        with pytest.raises(DimensionMismatch):
            solve_gheat_diag(box, phi, 1.0, cfg=FAST)

    def test_arity_check(self):
        with pytest.raises(DimensionMismatch):
            solve_gheat_diag(DiagonalBox((IV, IV)), SQUARE, 1.0, cfg=FAST)


class TestStepDiag:
    def test_cfl_violation_raises(self):
        u = np.zeros(17)
        with pytest.raises(CFLViolation):
            step_diag(u, [IV], h=0.1, dt=1.0)

    def test_monotone_and_constant_preserving(self):
        rng = np.random.default_rng(3)
        u = rng.standard_normal(33)
        v = u + rng.uniform(0.0, 1.0, 33)
        h, dt = 0.2, 0.4 * 0.2**2 / 4.0
        su, sv = step_diag(u, [IV], h, dt), step_diag(v, [IV], h, dt)
        assert np.all(sv >= su - 1e-12)
        const = step_diag(np.full(33, 7.0), [IV], h, dt)
        assert np.allclose(const, 7.0)


def test_diffuse_last_axis_matches_full_solve():
    # batched 1D diffusion of x*y^2 along y, sliced at x rows, equals
    # per-row 1D solves of the scaled quadratic
    g = build_grid([4.0], SQUARE, 1.0, None, SolverConfig(h=0.2))
    x = np.array([-1.0, 0.5, 2.0])
    u0 = x[:, None] * g.axis(0)[None, :] ** 2
    out, binfl, steps = diffuse_last_axis(u0, IV, g.h, 1.0)
    center = (out.shape[-1] - 1) // 2
    # E[x Y^2] = 4x for x > 0, -(-x) E[-Y^2] -> 1x for x < 0
    assert out[:, center] == pytest.approx([-1.0, 2.0, 8.0], rel=1e-6)
    assert steps >= 1


class TestSolveHull:
    def test_singleton_cross_term(self):
        hull = ConvexHull((np.array([[2.0, 1.0], [1.0, 2.0]]),))
        rep = solve_gheat_hull(hull, XY, 1.0, cfg=SolverConfig(h=0.25, refine=None))
        assert rep.value_at_origin == pytest.approx(1.0, abs=1e-6)

    def test_matches_diag_on_diagonal_generators(self):
        hull = ConvexHull(tuple(np.diag([a, b]) for a in (1.0, 4.0) for b in (1.0, 4.0)))
        rh = solve_gheat_hull(hull, XY_SQUARED, 1.0, cfg=SolverConfig(h=0.25, refine=None))
        rd = solve_gheat_diag(DiagonalBox((IV, IV)), XY_SQUARED, 1.0,
                              cfg=SolverConfig(h=0.25, refine=None))
        assert rh.value_at_origin == pytest.approx(rd.value_at_origin, abs=1e-9)

    def test_rejects_non_dominant_generator(self):
        hull = ConvexHull((np.array([[1.0, 2.0], [2.0, 5.0]]),))
        with pytest.raises(GExpectError, match="diagonally dominant"):
            solve_gheat_hull(hull, XY, 1.0, cfg=FAST)

    def test_2d_only(self):
        hull = ConvexHull((np.eye(3),))
        with pytest.raises(DimensionMismatch):
            solve_gheat_hull(hull, XY, 1.0, cfg=FAST)


def test_boundary_influence_is_small_on_sized_grids():
    rep = solve_gheat_1d(IV, ABS, 1.0, cfg=SolverConfig(h=0.2, refine=None))
    assert 0.0 <= rep.boundary_influence_estimate < 1e-3
