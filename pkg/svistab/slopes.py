"""Strong slopes, strict outer slopes and the global slope constant tau."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .config import (
    DEFAULT_DIRS_N,
    DEFAULT_EPS_SCHEDULE,
    DEFAULT_GRID_N,
    DEFAULT_R_SCHEDULE,
    DEFAULT_SEED,
    DEFAULT_TOLERANCES,
    Tolerances,
)
from .errors import InputError
from .estimates import (
    CONVERGED,
    EMPTY_BAND,
    INCONCLUSIVE,
    LOCAL_MINIMIZER,
    REGION_RESTRICTED,
    SlopeEstimate,
    fmt_value,
)
from .geometry import Box, ConeSpec, product_grid, sphere_directions, unit_grid
from .geometry.base import as_vector
from .setmaps import SetMap, phi, sample_solution, solve_slice_1d

# Fractions of each radius sampled by strong_slope
RADIUS_FRACTIONS = (0.25, 0.5, 1.0)

# Smallest radius strong_slope accepts
MIN_RADIUS = 1e-6

# Radii, relative to the local sampling scale, for slopes at band points
INNER_RADII = (1e-2, 3e-3, 1e-3)

# Per-axis counts for the refinement levels of tau (1-D, then higher dimensions)
TAU_GRID_LEVELS = (41, 81, 161)
TAU_GRID_LEVELS_ND = (11, 21, 31)

# Cap on joint (p, x) band samples per level
BAND_BUDGET = 625


@dataclass(frozen=True)
class ScalarFn:
    """psi: R^n -> R u {+inf} with optional derivative oracles."""
    evaluator: Callable[[np.ndarray], float]
    dim: int = 1
    gradient: Callable[[np.ndarray], np.ndarray] | None = None
    subdiff_dist: Callable[[np.ndarray], float] | None = None
    name: str = "psi"

    def __call__(self, x: Any) -> float:
        return float(self.evaluator(as_vector(x, self.dim, name="x")))

    def scaled(self, c: float) -> "ScalarFn":
        return ScalarFn(lambda x: c * self.evaluator(x), self.dim, name=f"{c}*{self.name}")


def excess_function(F: SetMap, C: ConeSpec, p: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> ScalarFn:
    """x -> phi_F(p, x) with p frozen."""
    p = as_vector(p, F.p_dim, name="p")
    return ScalarFn(lambda x: phi(F, C, p, x, tol), F.x_dim, name=f"phi_F({p.tolist()}, .)")


def _check_schedule(schedule: Sequence[float], name: str, floor: float = 0.0) -> tuple[float, ...]:
    sched = tuple(float(s) for s in schedule)
    if not sched:
        raise InputError(f"{name} must not be empty")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise InputError(f"{name} must be strictly decreasing, got {list(sched)}")
    if sched[-1] < floor or sched[-1] <= 0:
        raise InputError(f"{name} must stay above {floor:g}, got {sched[-1]:g}")
    return sched


def strong_slope(
    psi: ScalarFn,
    x: Any,
    r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
    dirs_n: int = DEFAULT_DIRS_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = DEFAULT_SEED,
) -> SlopeEstimate:
    """Estimate limsup (psi(x) - psi(u)) / |u - x| as u -> x.

    Per radius r the sup is taken over u = x + s r d for s in RADIUS_FRACTIONS
    and sampled unit d, clamped below at 0. If every descent ratio at the two
    smallest radii stays below tol.slope, x is taken as a local minimizer.
    """
    x = as_vector(x, psi.dim, name="x")
    radii = _check_schedule(r_schedule, "r_schedule", MIN_RADIUS)
    f0 = psi(x)
    if not math.isfinite(f0):
        raise InputError(f"{psi.name} is not finite at x={x.tolist()}")
    dirs = sphere_directions(psi.dim, dirs_n, seed)
    levels = []
    raw_max = []
    for r in radii:
        best = -math.inf
        for s in RADIUS_FRACTIONS:
            step = s * r
            for d in dirs:
                fu = psi(x + step * d)
                if math.isnan(fu) or fu == math.inf:
                    continue
                best = max(best, (f0 - fu) / step)
        raw_max.append(best)
        levels.append((r, max(0.0, best)))
    if len(raw_max) >= 2 and all(v <= tol.slope for v in raw_max[-2:]):
        return SlopeEstimate(
            "strong_slope", 0.0, tuple(levels), CONVERGED, (LOCAL_MINIMIZER,), {"x": x.tolist()}
        )
    return SlopeEstimate.from_levels("strong_slope", levels, tol, meta={"x": x.tolist()})


def exact_slope_convex(psi: ScalarFn, x: Any) -> float:
    """dist(0, subdifferential of psi at x), from the caller's oracle."""
    if psi.subdiff_dist is None:
        raise InputError(f"{psi.name} has no subdifferential-distance oracle")
    return float(psi.subdiff_dist(as_vector(x, psi.dim, name="x")))


def _inner_schedule(scale: float) -> tuple[float, ...]:
    scale = max(scale, MIN_RADIUS / INNER_RADII[-1])
    return tuple(f * scale for f in INNER_RADII)


def _band_estimate(
    kind: str,
    level_values: list[tuple[float, float, int]],
    tol: Tolerances,
    meta: dict[str, Any],
) -> SlopeEstimate:
    levels = [(eps, v) for eps, v, _ in level_values]
    meta = {**meta, "band_sizes": [n for _, _, n in level_values]}
    if level_values and level_values[-1][2] == 0:
        return SlopeEstimate(kind, math.inf, tuple(levels), INCONCLUSIVE, (EMPTY_BAND,), meta)
    return SlopeEstimate.from_levels(kind, levels, tol, meta=meta)


def strict_outer_slope(
    psi: ScalarFn,
    xbar: Any,
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE,
    grid_n: int = DEFAULT_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = DEFAULT_SEED,
) -> SlopeEstimate:
    """liminf of strong slopes at x -> xbar with psi(x) decreasing to psi(xbar).

    Per eps the inf runs over grid points of the eps-ball lying in the band
    psi(xbar) < psi(x) < psi(xbar) + eps; an empty band gives +inf.
    """
    xbar = as_vector(xbar, psi.dim, name="xbar")
    eps_sched = _check_schedule(eps_schedule, "eps_schedule")
    f0 = psi(xbar)
    if not math.isfinite(f0):
        raise InputError(f"{psi.name} is not finite at xbar={xbar.tolist()}")
    unit = unit_grid(psi.dim, grid_n, BAND_BUDGET)
    out = []
    for eps in eps_sched:
        inner = _inner_schedule(eps)
        best, count = math.inf, 0
        for x in xbar + eps * unit:
            fx = psi(x)
            if not (f0 < fx < f0 + eps):
                continue
            count += 1
            best = min(best, strong_slope(psi, x, inner, tol=tol, seed=seed).value)
        out.append((eps, best, count))
    return _band_estimate("strict_outer_slope", out, tol, {"xbar": xbar.tolist()})


def partial_strict_outer_slope(
    F: SetMap,
    C: ConeSpec,
    pbar: Any,
    xbar: Any,
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE,
    grid_n: int = DEFAULT_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = DEFAULT_SEED,
) -> SlopeEstimate:
    """liminf over (p, x) -> (pbar, xbar) with 0 < phi_F(p, x) -> 0 of the x-slope of phi_F(p, .).

    Samples range over the product B(pbar, eps) x B(xbar, eps). The slope
    is taken in x with p frozen per sample.
    """
    pbar = as_vector(pbar, F.p_dim, name="pbar")
    xbar = as_vector(xbar, F.x_dim, name="xbar")
    eps_sched = _check_schedule(eps_schedule, "eps_schedule")
    base = phi(F, C, pbar, xbar, tol)
    if base > tol.membership:
        raise InputError(f"(pbar, xbar) is not a solution: phi = {base:.3g}")
    joint = product_grid(F.p_dim, F.x_dim, grid_n, BAND_BUDGET)
    out = []
    for eps in eps_sched:
        inner = _inner_schedule(eps)
        best, count = math.inf, 0
        for z in eps * joint:
            p, x = pbar + z[: F.p_dim], xbar + z[F.p_dim:]
            value = phi(F, C, p, x, tol)
            if not (0.0 < value < eps):
                continue
            count += 1
            psi = excess_function(F, C, p, tol)
            best = min(best, strong_slope(psi, x, inner, tol=tol, seed=seed).value)
        out.append((eps, best, count))
    return _band_estimate(
        "partial_strict_outer_slope", out, tol, {"pbar": pbar.tolist(), "xbar": xbar.tolist()}
    )


def _grid_levels(dim: int, grid_n: int | Sequence[int] | None) -> tuple[int, ...]:
    if grid_n is None:
        levels = TAU_GRID_LEVELS if dim == 1 else TAU_GRID_LEVELS_ND
    elif isinstance(grid_n, int):
        levels = (grid_n, 2 * grid_n - 1, 4 * grid_n - 3)
    else:
        levels = tuple(int(n) for n in grid_n)
    if not levels or min(levels) < 2:
        raise InputError(f"tau needs grids of at least 2 points, got {grid_n}")
    return levels


def tau(
    F: SetMap,
    C: ConeSpec,
    pbar: Any,
    x_region: Box,
    grid_n: int | Sequence[int] | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = DEFAULT_SEED,
) -> SlopeEstimate:
    """inf of the strong slope of phi_F(pbar, .) over infeasible points of a bounded region.

    Always flagged region-restricted: the true constant is an inf over all
    of X. Levels refine the grid; the scale of a level is its grid spacing.
    An int grid_n n gives the levels n, 2n - 1 and 4n - 3, each halving the
    spacing of the one before.
    """
    if x_region.dim != F.x_dim:
        raise InputError("x_region dimension does not match F")
    psi = excess_function(F, C, pbar, tol)
    grid_levels = _grid_levels(F.x_dim, grid_n)
    out = []
    for n in grid_levels:
        spacing = float(np.min(x_region.hi - x_region.lo)) / (n - 1)
        inner = _inner_schedule(spacing)
        best, count = math.inf, 0
        for x in x_region.grid(n):
            if psi(x) <= tol.membership:
                continue
            count += 1
            best = min(best, strong_slope(psi, x, inner, tol=tol, seed=seed).value)
        out.append((spacing, best, count))
    meta = {"pbar": np.asarray(pbar, dtype=float).reshape(-1).tolist(), "region": x_region.to_record()}
    est = _band_estimate("tau", out, tol, meta)
    return SlopeEstimate(est.kind, est.value, est.levels, est.verdict, est.flags + (REGION_RESTRICTED,), est.meta)


@dataclass(frozen=True)
class ErrorBoundCheck:
    """dist(x, Solv(pbar)) <= gamma * phi_F(pbar, x) on a region, against gamma = 1 / tau."""
    gamma: float
    tau: SlopeEstimate
    bound: float | None
    points: int
    holds: bool | None

    def to_record(self) -> dict[str, Any]:
        return {
            "gamma": fmt_value(self.gamma),
            "bound": fmt_value(self.bound),
            "points": self.points,
            "holds": self.holds,
            "tau": self.tau.to_record(),
        }


def error_bound_check(
    F: SetMap,
    C: ConeSpec,
    pbar: Any,
    x_region: Box,
    grid_n: int | Sequence[int] | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = DEFAULT_SEED,
) -> ErrorBoundCheck:
    """Smallest gamma with dist(x, [phi_F(pbar, .) <= 0]) <= gamma * phi_F(pbar, x) on the region grid.

    A positive tau yields the error bound with gamma = 1 / tau. The bound is
    only formed from a converged tau; gamma is measured on the finest tau
    grid, with distances to the reconstructed solution set.
    """
    pbar = as_vector(pbar, F.p_dim, name="pbar")
    slope = tau(F, C, pbar, x_region, grid_n, tol, seed)
    n = _grid_levels(F.x_dim, grid_n)[-1]
    if F.x_dim == 1:
        solv = solve_slice_1d(F, C, pbar, x_region, tol=tol)
    else:
        solv = sample_solution(F, C, pbar, x_region, n, tol)
    gamma, count = 0.0, 0
    for x in x_region.grid(n):
        value = phi(F, C, pbar, x, tol)
        if value <= tol.membership or math.isinf(value):
            continue
        count += 1
        gamma = max(gamma, solv.distance(x) / value)
    bound = None
    if slope.verdict == CONVERGED and slope.value > tol.positivity:
        bound = 1.0 / slope.value
    holds = None if bound is None else gamma <= bound * (1.0 + tol.slack) + tol.level_abs
    return ErrorBoundCheck(gamma, slope, bound, count, holds)
