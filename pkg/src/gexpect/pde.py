"""Monotone explicit finite-difference solvers for the G-heat equation.

All schemes are forward Euler in time with 3-point second differences per
axis; cross terms (hull generators) use the upwinded 9-point splitting.
Boundary nodes keep zero discrete curvature (linear extrapolation), so no
flux is generated there, and the domain is truncated wide enough that the
Gaussian-type tail of the initial data cannot reach the evaluation point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CFLViolation, DimensionMismatch, GExpectError
from .gamma import ConvexHull, DiagonalBox, Interval1D, UncertaintyInterval
from .testfuncs import TestFunction

_TAIL_FACTOR = 8.0
_CFL_SAFETY = 0.4
_SHELL = 3  # nodes adjacent to each boundary tracked for influence


@dataclass(frozen=True)
class SolverConfig:
    """User-tunable solver knobs; None means derive automatically."""

    h: float | None = None
    half_width: float | None = None
    dt: float | None = None
    target_tol: float = 1e-3
    refine: str | None = "coarsen"  # None | "coarsen" | "halve"

    def __post_init__(self):
        for name in ("h", "half_width", "dt"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.refine not in (None, "coarsen", "halve"):
            raise ValueError("refine must be None, 'coarsen' or 'halve'")


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid: [-L_i, L_i] per axis at spacing h, stepped by dt."""

    half_width: tuple
    h: float
    dims: int
    time_horizon: float
    dt: float

    def __post_init__(self):
        hw = self.half_width
        if np.isscalar(hw):
            hw = (float(hw),) * self.dims
        hw = tuple(float(v) for v in hw)
        object.__setattr__(self, "half_width", hw)
        if len(hw) != self.dims:
            raise ValueError("half_width must have one entry per axis")
        if self.h <= 0 or self.dt <= 0 or self.time_horizon < 0:
            raise ValueError("need h > 0, dt > 0, time_horizon >= 0")
        for L in hw:
            cells = L / self.h
            if L <= 0 or abs(cells - round(cells)) > 1e-9 or round(cells) < 8:
                raise ValueError(f"half width {L} must be an integer multiple >= 8 of h={self.h}")

    def axis(self, i: int) -> np.ndarray:
        n = round(self.half_width[i] / self.h)
        return np.linspace(-self.half_width[i], self.half_width[i], 2 * n + 1)

    @property
    def steps(self) -> int:
        return max(1, math.ceil(self.time_horizon / self.dt - 1e-12))


@dataclass(frozen=True)
class SolveReport:
    value_at_origin: float
    boundary_influence_estimate: float
    refinement_delta: float | None
    steps_taken: int
    degenerate: bool = False


def _tail_halfwidth(center: float, sigma: float, t: float, phi: TestFunction, tol: float) -> float:
    """Per-axis truncation radius with an analytic-tail safety check."""
    k = _TAIL_FACTOR
    while k < 20.0:
        L = abs(center) + k * max(sigma, 1e-6) * math.sqrt(max(t, 1e-12))
        tail = phi.growth_const * (1.0 + (1.0 + L) ** phi.growth_order) * math.exp(-0.5 * k * k)
        if tail <= 0.1 * tol:
            return L
        k += 1.0
    return abs(center) + k * max(sigma, 1e-6) * math.sqrt(max(t, 1e-12))


def build_grid(sigma_high_sqs, phi: TestFunction, t: float, x0, cfg: SolverConfig,
               cfl_denominator: float | None = None) -> GridSpec:
    """Derive a grid from the variance scales and the declared growth of phi.

    cfl_denominator defaults to sum of the per-axis sigma_high_sq values
    (the diagonal-generator stability weight); hull solves pass their own.
    """
    sig_sq = np.asarray(sigma_high_sqs, dtype=float)
    n = sig_sq.size
    x0 = np.zeros(n) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != n:
        raise DimensionMismatch(f"x0 has {x0.size} entries for a {n}-dimensional solve")
    sig_max = math.sqrt(float(sig_sq.max()))
    if sig_max == 0.0:
        raise GExpectError("all variances are zero; nothing to diffuse")

    if cfg.half_width is not None:
        halves = [cfg.half_width] * n
    else:
        halves = [_tail_halfwidth(x0[i], math.sqrt(sig_sq[i]), t, phi, cfg.target_tol)
                  for i in range(n)]
    h = cfg.h if cfg.h is not None else min(0.02 * min(halves), 0.05 * sig_max * math.sqrt(t))
    halves = [max(math.ceil(L / h - 1e-9), 8) * h for L in halves]

    denom = cfl_denominator if cfl_denominator is not None else float(sig_sq.sum())
    dt_max = _CFL_SAFETY * h * h / denom
    dt = cfg.dt if cfg.dt is not None else dt_max
    dt = t / max(1, math.ceil(t / dt - 1e-12))
    return GridSpec(half_width=tuple(halves), h=h, dims=n, time_horizon=t, dt=dt)


def _check_monotone(dt: float, h: float, weight: float):
    # weight = sum of off-center stencil coefficients times h^2
    if dt * weight / (h * h) > 1.0 + 1e-9:
        raise CFLViolation(
            f"dt={dt:g} breaks monotonicity: need dt <= {h * h / weight:g} for h={h:g}"
        )


def _second_diff(u: np.ndarray, axis: int) -> np.ndarray:
    d = np.zeros_like(u)
    mid = [slice(None)] * u.ndim
    lo, hi = list(mid), list(mid)
    mid[axis], lo[axis], hi[axis] = slice(1, -1), slice(None, -2), slice(2, None)
    d[tuple(mid)] = u[tuple(hi)] - 2.0 * u[tuple(mid)] + u[tuple(lo)]
    return d


def _shell_max(arr: np.ndarray, axes) -> float:
    best = 0.0
    for ax in axes:
        if arr.shape[ax] < 2 * (_SHELL + 1):
            return float(np.abs(arr).max())
        front, back = [slice(None)] * arr.ndim, [slice(None)] * arr.ndim
        front[ax] = slice(1, _SHELL + 1)
        back[ax] = slice(-_SHELL - 1, -1)
        best = max(best, float(np.abs(arr[tuple(front)]).max()),
                   float(np.abs(arr[tuple(back)]).max()))
    return best


def step_diag(u: np.ndarray, intervals, h: float, dt: float) -> np.ndarray:
    """One explicit step of du/dt = sum_i Gbar_i(d2u/dx_i^2); monotone under CFL."""
    ivs = list(intervals)
    weight = sum(iv.sigma_high_sq for iv in ivs)
    _check_monotone(dt, h, weight)
    incr = np.zeros_like(u)
    offset = u.ndim - len(ivs)  # leading axes are passive batch axes
    for i, iv in enumerate(ivs):
        d = _second_diff(u, offset + i)
        incr += np.where(d > 0.0, 0.5 * iv.sigma_high_sq * d, 0.5 * iv.sigma_low_sq * d)
    return u + (dt / (h * h)) * incr


def _run_diag(u0: np.ndarray, intervals, grid: GridSpec, diffusing_axes) -> tuple:
    ivs = list(intervals)
    weight = sum(iv.sigma_high_sq for iv in ivs)
    _check_monotone(grid.dt, grid.h, weight)
    lam = grid.dt / (grid.h * grid.h)
    u = np.array(u0, dtype=float)
    binfl = 0.0
    for _ in range(grid.steps):
        incr = np.zeros_like(u)
        for iv, ax in zip(ivs, diffusing_axes):
            d = _second_diff(u, ax)
            incr += np.where(d > 0.0, 0.5 * iv.sigma_high_sq * d, 0.5 * iv.sigma_low_sq * d)
        incr *= lam
        binfl = max(binfl, _shell_max(incr, diffusing_axes))
        u += incr
    return u, binfl


def diffuse_last_axis(u0: np.ndarray, iv: UncertaintyInterval, h: float, t: float,
                      dt: float | None = None) -> tuple:
    """Diffuse a tabulated array along its last axis only (nested recursion step).

    Returns (final array, boundary influence, steps taken).
    """
    if t == 0.0:
        return np.array(u0, dtype=float), 0.0, 0
    if dt is None:
        dt = _CFL_SAFETY * h * h / max(iv.sigma_high_sq, 1e-300)
    dt = t / max(1, math.ceil(t / dt - 1e-12))
    grid = GridSpec(half_width=(8 * h,), h=h, dims=1, time_horizon=t, dt=dt)  # dt/steps carrier
    u, binfl = _run_diag(u0, [iv], grid, [u0.ndim - 1])
    return u, binfl, grid.steps


def _interp_multilinear(u: np.ndarray, axes, point) -> float:
    for coord, g in zip(point, axes):
        if coord < g[0] - 1e-12 or coord > g[-1] + 1e-12:
            raise GExpectError(f"evaluation point {coord} outside the grid [{g[0]}, {g[-1]}]")
        j = min(int(np.searchsorted(g, coord, side="right")) - 1, g.size - 2)
        j = max(j, 0)
        w = (coord - g[j]) / (g[j + 1] - g[j])
        u = (1.0 - w) * u[j] + w * u[j + 1]
    return float(u)


def _eval_initial(phi: TestFunction, grid: GridSpec) -> np.ndarray:
    axes = [grid.axis(i) for i in range(grid.dims)]
    mesh = np.meshgrid(*axes, indexing="ij")
    u0 = np.asarray(phi(*mesh), dtype=float)
    if not np.all(np.isfinite(u0)):
        raise GExpectError("initial data evaluates to non-finite values on the grid")
    return u0


def _with_refinement(report: SolveReport, solve_again, cfg: SolverConfig) -> SolveReport:
    if cfg.refine is None:
        return report
    factor = 2.0 if cfg.refine == "coarsen" else 0.5
    other = solve_again(replace(cfg, refine=None, h=None, dt=None), factor)
    delta = abs(report.value_at_origin - other.value_at_origin)
    return replace(report, refinement_delta=delta)


def solve_gheat_1d(iv: UncertaintyInterval, phi: TestFunction, t: float, x0: float = 0.0,
                   grid: GridSpec | None = None, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """u(t, x0) for du/dt = Gbar(u_xx), u(0, .) = phi."""
    if phi.arity != 1:
        raise DimensionMismatch("solve_gheat_1d needs a 1-argument test function")
    return solve_gheat_diag(DiagonalBox((iv,)), phi, t, [x0], grid=grid, cfg=cfg)


def solve_gheat_diag(box: DiagonalBox, phi: TestFunction, t: float, x0=None,
                     grid: GridSpec | None = None, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """u(t, x0) for du/dt = sum_i Gbar_i(d2u/dx_i^2) on a tensor grid."""
    if isinstance(box, Interval1D):
        box = DiagonalBox((box.interval,))
    n = box.dim
    if n > 3:
        raise DimensionMismatch(f"diagonal solver supports dimension <= 3, got {n}")
    if phi.arity != n:
        raise DimensionMismatch(f"phi takes {phi.arity} arguments but the box has dimension {n}")
    if t < 0:
        raise GExpectError("time horizon must be nonnegative")
    x0 = np.zeros(n) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    degenerate = any(iv.sigma_low_sq == 0.0 for iv in box.intervals)
    if t == 0.0 or all(iv.sigma_high_sq == 0.0 for iv in box.intervals):
        return SolveReport(float(phi(*x0)), 0.0, 0.0 if cfg.refine else None, 0, degenerate)

    sig_sqs = [iv.sigma_high_sq for iv in box.intervals]
    own_grid = grid is None
    if own_grid:
        grid = build_grid(sig_sqs, phi, t, x0, cfg)
    u0 = _eval_initial(phi, grid)
    u, binfl = _run_diag(u0, box.intervals, grid, range(n))
    value = _interp_multilinear(u, [grid.axis(i) for i in range(n)], x0)
    report = SolveReport(value, binfl, None, grid.steps, degenerate)
    if own_grid:
        report = _with_refinement(
            report,
            lambda c, f: solve_gheat_diag(box, phi, t, x0, cfg=replace(c, h=grid.h * f)),
            cfg,
        )
    return report


def _hull_fluxes(u: np.ndarray, gens, h: float) -> np.ndarray:
    c = u[1:-1, 1:-1]
    dxx = u[2:, 1:-1] - 2.0 * c + u[:-2, 1:-1]
    dyy = u[1:-1, 2:] - 2.0 * c + u[1:-1, :-2]
    plus = u[2:, 2:] + u[:-2, :-2] + 2.0 * c - u[2:, 1:-1] - u[:-2, 1:-1] - u[1:-1, 2:] - u[1:-1, :-2]
    minus = u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 2.0 * c - u[2:, :-2] - u[:-2, 2:]
    best = None
    for b in gens:
        b12 = b[0, 1]
        cross = b12 * (plus if b12 >= 0 else minus)
        flux = 0.5 * (b[0, 0] * dxx + b[1, 1] * dyy) + 0.5 * cross
        best = flux if best is None else np.maximum(best, flux)
    return best / (h * h)


def solve_gheat_hull(hull: ConvexHull, phi: TestFunction, t: float, x0=None,
                     grid: GridSpec | None = None, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """2D solve with flux max over hull generators (Kushner 9-point stencil)."""
    if hull.dim != 2:
        raise DimensionMismatch("hull solver is 2D only")
    if phi.arity != 2:
        raise DimensionMismatch("phi must take 2 arguments")
    if t < 0:
        raise GExpectError("time horizon must be nonnegative")
    for b in hull.generators:
        if b[0, 0] - abs(b[0, 1]) < -1e-12 or b[1, 1] - abs(b[0, 1]) < -1e-12:
            raise GExpectError(
                f"hull generator is not diagonally dominant (scheme would lose monotonicity):\n{b}"
            )
    x0 = np.zeros(2) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    degenerate = any(np.linalg.eigvalsh(b).min() <= 1e-12 for b in hull.generators)
    if t == 0.0:
        return SolveReport(float(phi(*x0)), 0.0, 0.0 if cfg.refine else None, 0, degenerate)

    sig_sqs = [max(b[i, i] for b in hull.generators) for i in range(2)]
    weight = max(float(np.abs(b).sum()) for b in hull.generators)
    own_grid = grid is None
    if own_grid:
        grid = build_grid(sig_sqs, phi, t, x0, cfg, cfl_denominator=weight)
    _check_monotone(grid.dt, grid.h, weight)
    u = _eval_initial(phi, grid)
    binfl = 0.0
    for _ in range(grid.steps):
        incr = grid.dt * _hull_fluxes(u, hull.generators, grid.h)
        binfl = max(binfl, _shell_max(incr, (0, 1)))
        u[1:-1, 1:-1] += incr
    value = _interp_multilinear(u, [grid.axis(0), grid.axis(1)], x0)
    report = SolveReport(value, binfl, None, grid.steps, degenerate)
    if own_grid:
        report = _with_refinement(
            report,
            lambda c, f: solve_gheat_hull(hull, phi, t, x0, cfg=replace(c, h=grid.h * f)),
            cfg,
        )
    return report
