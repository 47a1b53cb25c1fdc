"""Sublinear expectations of G-normal and sequentially independent vectors.

Expectations are computed by monotone explicit finite-difference solvers
for the G-heat equation; sequential (nested) independence is handled by a
backward recursion of 1D solves. Scenario runners turn the comparison
identities and inequalities separating the two constructions into
machine-checkable reports.
"""

from .errors import CFLViolation, DimensionMismatch, EmptyHull, GExpectError
from .gamma import (ConvexHull, DiagonalBox, GammaSet, Interval1D,
                    RankOneFamily, SymMatrix, UncertaintyInterval,
                    check_scaling_constraint, g_function, gamma_sets_equal,
                    gbar, image_gamma, is_diagonal_image, rank_one_gamma,
                    singleton_zero)
from .testfuncs import TestFunction, clamped, linear_pullback, monomial
from .pde import (GridSpec, SolveReport, SolverConfig, build_grid,
                  diffuse_last_axis, solve_gheat_1d, solve_gheat_diag,
                  solve_gheat_hull, step_diag)
from .expectation import (ExpectationResult, GNormal, LinearImage, Maximal,
                          MeanCertaintyReport, RandomVectorSpec, Sequential,
                          convex_oracle_1d, expect, expect_gnormal,
                          expect_maximal, expect_sequential,
                          gauss_hermite_expectation,
                          gauss_hermite_expectation_nd, lower_expectation,
                          mean_certainty_check)
from .scenarios import (Assertion, Quantity, ScenarioOutcome,
                        run_asymmetric_independence, run_diag_not_indep,
                        run_invertible_scan, run_linear_combination,
                        run_linear_image, run_quadratic_form,
                        run_reverse_independence_witness,
                        run_symmetry_identity)
from .cli import RunConfig, SCENARIO_NAMES, execute, main, parse_args

__version__ = "0.1.0"
