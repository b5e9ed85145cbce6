"""Empirical Lipschitz-type moduli of set-valued maps and scalar calmness moduli."""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Protocol, Sequence

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT_DELTA_SCHEDULE, DEFAULT_GRID_N, DEFAULT_TOLERANCES, Tolerances
from .errors import InputError
from .estimates import REGION_RESTRICTED, SAMPLED, ModulusEstimate, fmt_value
from .geometry import Box, ConvexBody, excess, hausdorff, unit_grid
from .geometry.base import as_vector
from .geometry.polyhedra import VPolyhedron
from .setmaps import FanMap, InclusionInstance, SetMap, sample_solution, solve_slice_1d
from .setmaps.solution import DEFAULT_SLICE_GRID

# Moduli need this many agreeing levels before they count as converged
STABLE_LEVELS = 3

# Per-axis counts for pair sweeps (liploc, lip_p F, joint lip F)
PAIR_GRID_N = 11
X_SWEEP_N = 21
JOINT_BUDGET = 81

# Grid used to sample Solv(p) when x is multi-dimensional
SAMPLED_SOLUTION_GRID = 21


class SetValue(Protocol):
    """Queries answered by one value Phi(p)."""

    @property
    def is_empty(self) -> bool: ...

    def distance(self, x: Any) -> float: ...

    def excess_over(self, other: Any) -> float: ...

    def sample(self, center: Any, radius: float, n: int = 21) -> np.ndarray: ...


class BodyValue:
    """SetValue adapter for a convex body."""

    is_empty = False

    def __init__(self, body: ConvexBody, tol: float = 1e-9):
        self.body = body
        self.tol = tol

    def distance(self, x: Any) -> float:
        return self.body.distance(np.asarray(x, dtype=float).reshape(-1))

    def excess_over(self, other: "BodyValue") -> float:
        return excess(self.body, other.body, self.tol)

    def sample(self, center: Any, radius: float, n: int = 21) -> np.ndarray:
        """Points of body within the ball: interval grid in 1-D, else vertices,
        pairwise midpoints and the projection of the center."""
        c = np.asarray(center, dtype=float).reshape(-1)
        body = self.body
        if body.dim == 1:
            lo, hi = body.interval_bounds()
            a, b = max(lo, c[0] - radius), min(hi, c[0] + radius)
            if a > b:
                return np.empty((0, 1))
            return np.linspace(a, b, n).reshape(-1, 1)
        cands = []
        if isinstance(body, VPolyhedron):
            pts = body.points
            cands.extend(pts)
            cands.extend((a + b) / 2.0 for a, b in itertools.combinations(pts, 2))
            cands.append(pts.mean(axis=0))
            for v in pts:
                for ray in body.rays:
                    cands.extend(v + t * radius * ray / np.linalg.norm(ray) for t in (0.5, 1.0))
            cands.append(body.nearest(c))
        arr = np.array(cands, dtype=float).reshape(-1, body.dim)
        return arr[np.linalg.norm(arr - c, axis=1) <= radius + 1e-12]


class ParamSetMap(ABC):
    """A map v -> Phi(v) of one free variable, queried value by value."""

    dim: int = 1
    default_zeta: float | None = None
    name: str = "Phi"

    @abstractmethod
    def at(self, v: Any) -> SetValue:
        raise NotImplementedError


class SliceParamMap(ParamSetMap):
    """p -> F(p, x) (free="p") or x -> F(p, x) (free="x") with the other variable frozen."""

    def __init__(self, F: SetMap, free: str, fixed: Any, tol: float = 1e-9):
        if free not in ("p", "x"):
            raise InputError(f"free must be 'p' or 'x', got {free!r}")
        self.F = F
        self.free = free
        self.fixed = np.asarray(fixed, dtype=float).reshape(-1)
        self.dim = F.p_dim if free == "p" else F.x_dim
        self.tol = tol
        self.name = f"F(., {self.fixed.tolist()})" if free == "p" else f"F({self.fixed.tolist()}, .)"

    def at(self, v: Any) -> BodyValue:
        if self.free == "p":
            return BodyValue(self.F.evaluate(v, self.fixed), self.tol)
        return BodyValue(self.F.evaluate(self.fixed, v), self.tol)


class SolutionParamMap(ParamSetMap):
    """p -> Solv(p), reconstructed per p and cached."""

    def __init__(self, instance: InclusionInstance, grid_n: int = DEFAULT_SLICE_GRID):
        self.instance = instance
        self.grid_n = grid_n
        self.dim = instance.F.p_dim
        self.default_zeta = 0.5 * instance.x_half_width
        self.name = "Solv"
        self._cache: dict[tuple[float, ...], SetValue] = {}

    def at(self, v: Any) -> SetValue:
        key = tuple(np.asarray(v, dtype=float).reshape(-1).tolist())
        if key not in self._cache:
            inst = self.instance
            if inst.F.x_dim == 1:
                value = solve_slice_1d(inst.F, inst.C, key, inst.x_window, self.grid_n, inst.tolerances)
            else:
                value = sample_solution(inst.F, inst.C, key, inst.x_window, SAMPLED_SOLUTION_GRID,
                                        inst.tolerances)
            self._cache[key] = value
        return self._cache[key]


def _offsets(dim: int, grid_n: int) -> np.ndarray:
    """Nonzero points of the unit-ball grid."""
    grid = unit_grid(dim, grid_n, budget=grid_n ** min(dim, 2))
    return grid[np.linalg.norm(grid, axis=1) > 0]


def _ratio(num: float, den: float) -> float:
    if math.isinf(num):
        return math.inf
    return num / den


def _estimate(kind: str, levels, tol: Tolerances, flags=(), meta=None) -> ModulusEstimate:
    return ModulusEstimate.from_levels(kind, levels, tol, STABLE_LEVELS, flags, meta)


def _edge_flags(values: Sequence[SetValue]) -> tuple[str, ...]:
    """REGION_RESTRICTED when a value touches its window edge.

    Excess beyond the window is not seen, so the sup may be understated.
    """
    if any(any(getattr(v, "truncated", ())) for v in values):
        return (REGION_RESTRICTED,)
    return ()


def liplsc_modulus(
    Phi: ParamSetMap,
    pbar: Any,
    xbar: Any,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    grid_n: int = DEFAULT_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """sup over p near pbar of dist(xbar, Phi(p)) / d(p, pbar), per delta."""
    pbar = as_vector(pbar, Phi.dim, name="pbar")
    base = Phi.at(pbar)
    if base.is_empty or base.distance(xbar) > tol.membership:
        raise InputError(f"xbar is not in {Phi.name}(pbar)")
    offsets = _offsets(Phi.dim, grid_n)
    levels = []
    for delta in delta_schedule:
        best = 0.0
        for t in offsets:
            step = delta * t
            best = max(best, _ratio(Phi.at(pbar + step).distance(xbar), float(np.linalg.norm(step))))
        levels.append((delta, best))
    return _estimate("liplsc", levels, tol, meta={"map": Phi.name})


def calm_modulus(
    Phi: ParamSetMap,
    pbar: Any,
    xbar: Any,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    zeta: float | None = None,
    grid_n: int = DEFAULT_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """sup over p near pbar and w in Phi(p) within zeta of xbar of dist(w, Phi(pbar)) / d(p, pbar)."""
    pbar = as_vector(pbar, Phi.dim, name="pbar")
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    zeta = Phi.default_zeta if zeta is None else zeta
    if zeta is None or zeta <= 0:
        raise InputError("calm_modulus needs a positive zeta")
    base = Phi.at(pbar)
    if base.is_empty or base.distance(xbar) > tol.membership:
        raise InputError(f"xbar is not in {Phi.name}(pbar)")
    offsets = _offsets(Phi.dim, grid_n)
    levels = []
    for delta in delta_schedule:
        best = 0.0
        for t in offsets:
            step = delta * t
            d = float(np.linalg.norm(step))
            for w in Phi.at(pbar + step).sample(xbar, zeta):
                best = max(best, _ratio(base.distance(w), d))
        levels.append(((delta, zeta), best))
    return _estimate("calm", levels, tol, meta={"map": Phi.name, "zeta": zeta})


def lipusc_modulus(
    Phi: ParamSetMap,
    pbar: Any,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    grid_n: int = DEFAULT_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """sup over p near pbar of e(Phi(p), Phi(pbar)) / d(p, pbar)."""
    pbar = as_vector(pbar, Phi.dim, name="pbar")
    base = Phi.at(pbar)
    if base.is_empty:
        raise InputError(f"{Phi.name}(pbar) is empty")
    offsets = _offsets(Phi.dim, grid_n)
    levels = []
    seen = [base]
    for delta in delta_schedule:
        best = 0.0
        for t in offsets:
            step = delta * t
            value = Phi.at(pbar + step)
            seen.append(value)
            best = max(best, _ratio(value.excess_over(base), float(np.linalg.norm(step))))
        levels.append((delta, best))
    flags = _edge_flags(seen)
    return _estimate("lipusc", levels, tol, flags, {"map": Phi.name, "window_edge": bool(flags)})


def liploc_modulus(
    Phi: ParamSetMap,
    pbar: Any,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    grid_n: int = PAIR_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """sup over pairs p1 != p2 near pbar of H(Phi(p1), Phi(p2)) / d(p1, p2)."""
    pbar = as_vector(pbar, Phi.dim, name="pbar")
    if Phi.at(pbar).is_empty:
        raise InputError(f"{Phi.name}(pbar) is empty")
    grid = unit_grid(Phi.dim, grid_n, budget=grid_n ** min(Phi.dim, 2))
    levels = []
    seen = []
    for delta in delta_schedule:
        pts = pbar + delta * grid
        values = [Phi.at(p) for p in pts]
        seen.extend(values)
        best = 0.0
        for i, j in itertools.combinations(range(len(pts)), 2):
            d = float(np.linalg.norm(pts[i] - pts[j]))
            h = max(values[i].excess_over(values[j]), values[j].excess_over(values[i]))
            best = max(best, _ratio(h, d))
            if math.isinf(best):
                break
        levels.append((delta, best))
    flags = _edge_flags(seen)
    return _estimate("liploc", levels, tol, flags, {"map": Phi.name, "window_edge": bool(flags)})


def scalar_calm_moduli(
    psi: Callable[[np.ndarray], float],
    pbar: Any,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    grid_n: int = DEFAULT_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
    dim: int | None = None,
) -> tuple[ModulusEstimate, ModulusEstimate, ModulusEstimate]:
    """Calmness from above, from below and two-sided of a real function at pbar."""
    pbar = as_vector(pbar, dim or getattr(psi, "dim", None), name="pbar")
    f0 = float(psi(pbar))
    if not math.isfinite(f0):
        raise InputError(f"function is not finite at pbar={pbar.tolist()}")
    offsets = _offsets(pbar.size, grid_n)
    upper, lower, both = [], [], []
    for delta in delta_schedule:
        u = lo = 0.0
        for t in offsets:
            step = delta * t
            d = float(np.linalg.norm(step))
            diff = float(psi(pbar + step)) - f0
            if math.isnan(diff):
                continue
            u = max(u, max(diff, 0.0) / d)
            lo = max(lo, max(-diff, 0.0) / d)
        upper.append((delta, u))
        lower.append((delta, lo))
        both.append((delta, max(u, lo)))
    return (
        _estimate("ucalm", upper, tol),
        _estimate("lcalm", lower, tol),
        _estimate("calm_scalar", both, tol),
    )


def lip_p_modulus(
    F: SetMap,
    pbar: Any,
    x_window: Box,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    grid_n: int = PAIR_GRID_N,
    x_n: int = X_SWEEP_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """sup over x in the window and p1 != p2 near pbar of H(F(p1, x), F(p2, x)) / d(p1, p2).

    Flagged region-restricted: x only ranges over the window.
    """
    pbar = as_vector(pbar, F.p_dim, name="pbar")
    flags = (REGION_RESTRICTED,)
    meta = {"region": x_window.to_record()}
    if not F.depends_on_p:
        levels = [(delta, 0.0) for delta in delta_schedule]
        return _estimate("lip_p", levels, tol, flags, meta)
    xs = x_window.grid(x_n if F.x_dim == 1 else max(3, int(round(x_n ** (1.0 / F.x_dim)))))
    grid = unit_grid(F.p_dim, grid_n, budget=grid_n ** min(F.p_dim, 2))
    levels = []
    for delta in delta_schedule:
        pts = pbar + delta * grid
        best = 0.0
        for x in xs:
            values = [F.evaluate(p, x) for p in pts]
            for i, j in itertools.combinations(range(len(pts)), 2):
                d = float(np.linalg.norm(pts[i] - pts[j]))
                best = max(best, _ratio(hausdorff(values[i], values[j], tol.membership), d))
        levels.append((delta, best))
    return _estimate("lip_p", levels, tol, flags, meta)


def lip_joint_modulus(
    F: SetMap,
    pbar: Any,
    xbar: Any,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    grid_n: int = PAIR_GRID_N,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """Local Lipschitz modulus of F near (pbar, xbar) under the max distance on P x X."""
    pbar = as_vector(pbar, F.p_dim, name="pbar")
    xbar = as_vector(xbar, F.x_dim, name="xbar")
    k = F.p_dim
    grid = unit_grid(k + F.x_dim, grid_n, budget=JOINT_BUDGET)
    center = np.concatenate([pbar, xbar])
    levels = []
    for delta in delta_schedule:
        pts = center + delta * grid
        values = [F.evaluate(z[:k], z[k:]) for z in pts]
        best = 0.0
        for i, j in itertools.combinations(range(len(pts)), 2):
            diff = pts[i] - pts[j]
            d = max(float(np.linalg.norm(diff[:k])), float(np.linalg.norm(diff[k:])))
            best = max(best, _ratio(hausdorff(values[i], values[j], tol.membership), d))
            if math.isinf(best):
                break
        levels.append((delta, best))
    return _estimate("lip", levels, tol, (SAMPLED,))


@dataclass(frozen=True)
class BundleBound:
    """Upper bound on Liplsc of x -> {L x : L in G} at (0, 0) by the smallest operator norm in G."""
    value: float
    vertex_min: float
    weights: tuple[float, ...]

    def to_record(self) -> dict[str, Any]:
        return {
            "bound": fmt_value(self.value),
            "vertex_min": fmt_value(self.vertex_min),
            "weights": list(self.weights),
        }


def bundle_liplsc_bound(F: FanMap, p: Any) -> BundleBound:
    """inf of the spectral norm over conv G(p), searched over simplex weights.

    Every L in conv G(p) gives dist(0, F(p, x)) <= |L x| <= |L| |x|, so any
    point the search reaches is a valid bound.
    """
    if not isinstance(F, FanMap):
        raise InputError(f"bundle bounds need a fan map, got {F.kind}")
    mats = F.matrices_at(as_vector(p, F.p_dim, name="p"))
    norms = np.array([np.linalg.norm(L, 2) for L in mats])
    k = len(mats)
    w0 = np.eye(k)[int(np.argmin(norms))]
    best, weights = float(norms.min()), w0
    if k > 1:
        res = minimize(
            lambda w: np.linalg.norm(np.tensordot(w, mats, axes=1), 2),
            w0,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * k,
            constraints=[{"type": "eq", "fun": lambda w: np.sum(w) - 1.0}],
        )
        w = np.clip(res.x, 0.0, None)
        w = w / w.sum()
        value = float(np.linalg.norm(np.tensordot(w, mats, axes=1), 2))
        if value < best:
            best, weights = value, w
    return BundleBound(best, float(norms.min()), tuple(float(v) for v in weights))
