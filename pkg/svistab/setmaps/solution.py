"""Excess function phi_F, Solv membership and 1-D solution slices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..config import DEFAULT_TOLERANCES, Tolerances
from ..errors import DimensionError, InputError
from ..geometry import Box, ConeSpec, Interval, excess
from .base import SetMap

# Smallest grid accepted by solve_slice_1d
MIN_SLICE_GRID = 16

# Default grid for slice reconstruction
DEFAULT_SLICE_GRID = 201


def phi(F: SetMap, C: ConeSpec, p: Any, x: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """phi_F(p, x) = e(F(p, x), C), possibly +inf."""
    return excess(F.evaluate(p, x), C.cone, tol.membership)


def in_solution(F: SetMap, C: ConeSpec, p: Any, x: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return phi(F, C, p, x, tol) <= tol.membership


def _window_bounds(window: Box | tuple[float, float]) -> tuple[float, float]:
    if isinstance(window, Box):
        if window.dim != 1:
            raise DimensionError("slice windows are 1-D", 1, window.dim)
        return float(window.lo[0]), float(window.hi[0])
    lo, hi = window
    if not lo < hi:
        raise InputError(f"empty slice window ({lo}, {hi})")
    return float(lo), float(hi)


@dataclass(frozen=True)
class SolutionSlice:
    """Solv(p) intersected with a window, as a sorted list of disjoint intervals.

    Intervals reaching a window edge are read as continuing past it
    (``truncated``), so distance and excess queries do not see the window.
    """
    p: tuple[float, ...]
    window: tuple[float, float]
    intervals: tuple[tuple[float, float], ...]
    truncated: tuple[bool, bool] = (False, False)
    evaluations: int = field(default=0, compare=False)

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0

    def pieces(self) -> list[tuple[float, float]]:
        """Intervals with edge-touching ends opened to infinity."""
        out = []
        for i, (lo, hi) in enumerate(self.intervals):
            if i == 0 and self.truncated[0]:
                lo = -math.inf
            if i == len(self.intervals) - 1 and self.truncated[1]:
                hi = math.inf
            out.append((lo, hi))
        return out

    def bodies(self) -> list[Interval]:
        return [Interval(lo, hi) for lo, hi in self.pieces()]

    def contains(self, x: float, tol: float = 1e-9) -> bool:
        return self.distance(x) <= tol

    def distance(self, x: float) -> float:
        x = float(np.asarray(x, dtype=float).reshape(-1)[0])
        if self.is_empty:
            return math.inf
        return min(max(lo - x, x - hi, 0.0) for lo, hi in self.pieces())

    def excess_over(self, other: "SolutionSlice") -> float:
        """e(self, other); dist to a union is maximal at piece ends or gap midpoints."""
        if self.is_empty:
            return 0.0
        if other.is_empty:
            return math.inf
        mine, theirs = self.pieces(), other.pieces()
        if math.isinf(mine[0][0]) and not math.isinf(theirs[0][0]):
            return math.inf
        if math.isinf(mine[-1][1]) and not math.isinf(theirs[-1][1]):
            return math.inf
        gaps = [(a[1] + b[0]) / 2.0 for a, b in zip(theirs, theirs[1:])]
        best = 0.0
        for lo, hi in mine:
            cands = [v for v in (lo, hi) if not math.isinf(v)]
            cands += [g for g in gaps if lo <= g <= hi]
            best = max([best] + [other.distance(v) for v in cands])
        return best

    def sample(self, center: float, radius: float, n: int = 21) -> np.ndarray:
        """Points of the slice within the ball around center: piece ends plus a uniform grid."""
        lo_b, hi_b = center - radius, center + radius
        pts: list[float] = []
        for lo, hi in self.pieces():
            a, b = max(lo, lo_b), min(hi, hi_b)
            if a > b:
                continue
            pts.extend(np.linspace(a, b, n).tolist() if b > a else [a])
        return np.unique(np.array(pts, dtype=float))

    def to_record(self) -> dict[str, Any]:
        return {
            "p": list(self.p),
            "window": list(self.window),
            "intervals": [list(iv) for iv in self.intervals],
            "truncated": list(self.truncated),
        }


def _bisect(feasible, inside: float, outside: float, width: float) -> tuple[float, int]:
    """Locate the feasibility boundary between a feasible and an infeasible point."""
    count = 0
    while abs(outside - inside) > width:
        mid = 0.5 * (inside + outside)
        count += 1
        if feasible(mid):
            inside = mid
        else:
            outside = mid
    return inside, count


def solve_slice_1d(
    F: SetMap,
    C: ConeSpec,
    p: Any,
    x_window: Box | tuple[float, float],
    grid_n: int = DEFAULT_SLICE_GRID,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SolutionSlice:
    """Reconstruct Solv(p) within a 1-D window.

    Feasibility is in_solution on a uniform grid, then every sign change is
    bisected down to tol.root. Islands narrower than the grid step are
    not guaranteed to be found.
    """
    if F.x_dim != 1:
        raise DimensionError("solution slices need a 1-D decision variable", 1, F.x_dim)
    if grid_n < MIN_SLICE_GRID:
        raise InputError(f"grid_n must be at least {MIN_SLICE_GRID}, got {grid_n}")
    lo, hi = _window_bounds(x_window)
    p_vec = np.asarray(p, dtype=float).reshape(-1)

    def feasible(v: float) -> bool:
        return in_solution(F, C, p_vec, [v], tol)

    xs = np.linspace(lo, hi, grid_n)
    mask = np.array([feasible(v) for v in xs])
    evaluations = grid_n
    intervals = []
    i = 0
    while i < grid_n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < grid_n and mask[j + 1]:
            j += 1
        left, right = float(xs[i]), float(xs[j])
        if i > 0:
            left, n = _bisect(feasible, left, float(xs[i - 1]), tol.root)
            evaluations += n
        if j < grid_n - 1:
            right, n = _bisect(feasible, right, float(xs[j + 1]), tol.root)
            evaluations += n
        intervals.append((left, right))
        i = j + 1
    truncated = (bool(mask[0]), bool(mask[-1]))
    return SolutionSlice(tuple(p_vec.tolist()), (lo, hi), tuple(intervals), truncated, evaluations)


@dataclass(frozen=True)
class SampledSolution:
    """Feasible points of Solv(p) on a grid of a multi-dimensional window.

    Distance queries are answered from the sample; values are sampled
    approximations, never exact.
    """
    p: tuple[float, ...]
    points: np.ndarray

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    def distance(self, x: Any) -> float:
        if self.is_empty:
            return math.inf
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return float(np.min(np.linalg.norm(self.points - x, axis=1)))

    def contains(self, x: Any, tol: float = 1e-9) -> bool:
        return self.distance(x) <= tol

    def excess_over(self, other: "SampledSolution") -> float:
        if self.is_empty:
            return 0.0
        if other.is_empty:
            return math.inf
        diffs = self.points[:, None, :] - other.points[None, :, :]
        return float(np.max(np.min(np.linalg.norm(diffs, axis=2), axis=1)))

    def sample(self, center: Any, radius: float, n: int = 21) -> np.ndarray:
        center = np.asarray(center, dtype=float).reshape(1, -1)
        near = np.linalg.norm(self.points - center, axis=1) <= radius
        return self.points[near]


def sample_solution(
    F: SetMap,
    C: ConeSpec,
    p: Any,
    x_window: Box,
    grid_n: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SampledSolution:
    """Grid sample of Solv(p) for x_dim >= 2."""
    pts = x_window.grid(grid_n)
    keep = [x for x in pts if phi(F, C, p, x, tol) <= tol.membership]
    arr = np.array(keep, dtype=float).reshape(-1, F.x_dim)
    return SampledSolution(tuple(np.asarray(p, dtype=float).reshape(-1).tolist()), arr)

