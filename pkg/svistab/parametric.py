"""Optimal value function val(p), Argmin(p) and calmness of val."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT_DELTA_SCHEDULE, DEFAULT_TOLERANCES, Tolerances
from .errors import DimensionError, InputError, InstanceError
from .estimates import (
    CONVERGED,
    REGION_RESTRICTED,
    SAMPLED,
    ModulusEstimate,
    SlopeEstimate,
    bound_ratio,
    fmt_value,
)
from .expressions import Expression
from .geometry import Box, unit_grid
from .geometry.base import as_vector
from .moduli import STABLE_LEVELS, SliceParamMap, lip_p_modulus, lipusc_modulus, scalar_calm_moduli
from .setmaps import InclusionInstance, solve_slice_1d
from .slopes import partial_strict_outer_slope, tau

ATTAINED = "attained"
UNBOUNDED_BELOW = "unbounded_below"
INFEASIBLE = "infeasible"

# Grid points per solution interval before the bounded scalar refinement
VALUE_GRID_N = 201

# Per-axis p grid for calmness of val (each point costs one slice)
VAL_CALM_GRID_N = 21

# Grid refinements for lip theta over the windows
LIP_THETA_LEVELS = (5, 9, 17)
CALM_THETA_BUDGET = 121


@dataclass(frozen=True)
class Objective:
    """theta(p, x) with an optional global Lipschitz constant under the max distance."""
    evaluator: Callable[[np.ndarray, np.ndarray], float]
    p_dim: int = 1
    x_dim: int = 1
    lip_const_hint: float | None = None
    name: str = "theta"

    @classmethod
    def from_expression(
        cls, text: str, p_dim: int = 1, x_dim: int = 1, lip_const_hint: float | None = None
    ) -> "Objective":
        return cls(Expression.compile(text, p_dim, x_dim), p_dim, x_dim, lip_const_hint, text)

    def __call__(self, p: Any, x: Any) -> float:
        return float(self.evaluator(as_vector(p, self.p_dim, name="p"), as_vector(x, self.x_dim, name="x")))

    def to_record(self) -> dict[str, Any]:
        rec = {"expression": self.name, "p_dim": self.p_dim, "x_dim": self.x_dim}
        if self.lip_const_hint is not None:
            rec["lip_const_hint"] = self.lip_const_hint
        return rec


@dataclass(frozen=True)
class ValuePoint:
    p: tuple[float, ...]
    value: float
    argmin: tuple[float, ...]
    status: str
    note: str = ""

    def to_record(self) -> dict[str, Any]:
        rec = {"p": list(self.p), "value": fmt_value(self.value), "argmin": list(self.argmin), "status": self.status}
        if self.note:
            rec["note"] = self.note
        return rec


@dataclass(frozen=True)
class ValueProfile:
    points: tuple[ValuePoint, ...]

    def rows(self) -> list[tuple[float, float]]:
        """(p, val(p)) rows for a 1-D parameter."""
        return [(pt.p[0], pt.value) for pt in self.points]

    def to_record(self) -> dict[str, Any]:
        return {"points": [pt.to_record() for pt in self.points]}


def _objective(instance: InclusionInstance, theta: Objective | None) -> Objective:
    theta = theta if theta is not None else instance.objective
    if theta is None:
        raise InputError(f"instance {instance.id} has no objective")
    if theta.p_dim != instance.F.p_dim or theta.x_dim != instance.F.x_dim:
        raise DimensionError("objective dimensions do not match the instance", instance.F.x_dim, theta.x_dim)
    return theta


def _minimize_on(f: Callable[[float], float], lo: float, hi: float, grid_n: int, xatol: float) -> tuple[float, float]:
    """Grid search on [lo, hi], then bounded refinement around the best grid point."""
    if hi - lo <= xatol:
        return lo, f(lo)
    xs = np.linspace(lo, hi, grid_n)
    vals = np.array([f(v) for v in xs])
    i = int(np.argmin(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    a, b = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, grid_n - 1)])
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": xatol})
    if res.success and res.fun < best_v:
        best_x, best_v = float(res.x), float(res.fun)
    return best_x, best_v


def value_at(
    instance: InclusionInstance,
    theta: Objective | None,
    p: Any,
    grid_n: int = VALUE_GRID_N,
) -> ValuePoint:
    """val(p) = inf of theta(p, .) over Solv(p), with the minimizers found.

    A minimum at a window edge where Solv(p) continues and theta still
    decreases is reported as unbounded below; that test only sees the window.
    """
    theta = _objective(instance, theta)
    if instance.F.x_dim != 1:
        raise DimensionError("value_at needs a 1-D decision variable", 1, instance.F.x_dim)
    tol = instance.tolerances
    p_vec = as_vector(p, instance.F.p_dim, name="p")
    key = tuple(p_vec.tolist())
    sl = solve_slice_1d(instance.F, instance.C, p_vec, instance.x_window, tol=tol)
    if sl.is_empty:
        return ValuePoint(key, math.inf, (), INFEASIBLE)

    def f(v: float) -> float:
        return theta(p_vec, [v])

    found = []
    for k, (lo, hi) in enumerate(sl.intervals):
        x, v = _minimize_on(f, lo, hi, grid_n, tol.value)
        step = (hi - lo) / (grid_n - 1) if hi > lo else tol.value
        open_left = k == 0 and sl.truncated[0] and x - lo <= step
        open_right = k == len(sl.intervals) - 1 and sl.truncated[1] and hi - x <= step
        if (open_left and f(lo) < f(lo + step)) or (open_right and f(hi) < f(hi - step)):
            return ValuePoint(key, -math.inf, (), UNBOUNDED_BELOW, "decreasing at a window edge")
        found.append((x, v))
    value = min(v for _, v in found)
    slack = max(tol.value, 1e-6) * (1.0 + abs(value))
    argmin = tuple(sorted(x for x, v in found if v <= value + slack))
    return ValuePoint(key, value, argmin, ATTAINED)


def val_sweep(
    instance: InclusionInstance,
    theta: Objective | None = None,
    p_values: Sequence[Any] | None = None,
    n: int = 21,
) -> ValueProfile:
    """val over a list of parameters, or over an n-point grid of the p-window."""
    if p_values is None:
        p_values = instance.p_window.grid(n if instance.F.p_dim == 1 else max(3, int(round(n ** 0.5))))
    return ValueProfile(tuple(value_at(instance, theta, p) for p in p_values))


def calmness_from_above_theta(
    theta: Objective,
    pbar: Any,
    xbar: Any,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    grid_n: int = 11,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """sup of [theta(p, x) - theta(pbar, xbar)]+ / max(|p - pbar|, |x - xbar|) near (pbar, xbar)."""
    pbar = as_vector(pbar, theta.p_dim, name="pbar")
    xbar = as_vector(xbar, theta.x_dim, name="xbar")
    k = theta.p_dim
    grid = unit_grid(k + theta.x_dim, grid_n, budget=CALM_THETA_BUDGET)
    grid = grid[np.linalg.norm(grid, axis=1) > 0]
    f0 = theta(pbar, xbar)
    levels = []
    for delta in delta_schedule:
        best = 0.0
        for z in delta * grid:
            d = max(float(np.linalg.norm(z[:k])), float(np.linalg.norm(z[k:])))
            best = max(best, max(theta(pbar + z[:k], xbar + z[k:]) - f0, 0.0) / d)
        levels.append((delta, best))
    return ModulusEstimate.from_levels("ucalm_theta", levels, tol, STABLE_LEVELS)


def lipschitz_theta(
    theta: Objective,
    p_window: Box,
    x_window: Box,
    grid_levels: Sequence[int] = LIP_THETA_LEVELS,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusEstimate:
    """Lipschitz constant of theta on the windows under the max distance.

    Uses the hint when the objective carries one; otherwise the largest
    difference quotient over grid pairs, refined per level.
    """
    if theta.lip_const_hint is not None:
        hint = float(theta.lip_const_hint)
        return ModulusEstimate("lip_theta", hint, ((None, hint),), CONVERGED, (), {"source": "hint"})
    k = theta.p_dim
    total = k + theta.x_dim
    levels = []
    for n in grid_levels:
        axis_n = n if total == 2 else max(3, int(round(n ** (2.0 / total))))
        pts = np.array([
            np.concatenate([p, x]) for p, x in itertools.product(p_window.grid(axis_n), x_window.grid(axis_n))
        ])
        vals = np.array([theta(z[:k], z[k:]) for z in pts])
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.maximum(np.linalg.norm(diff[..., :k], axis=2), np.linalg.norm(diff[..., k:], axis=2))
        np.fill_diagonal(dist, np.inf)
        ratios = np.abs(vals[:, None] - vals[None, :]) / dist
        levels.append((n, float(ratios.max())))
    return ModulusEstimate.from_levels(
        "lip_theta", levels, tol, 2, (SAMPLED, REGION_RESTRICTED), {"source": "window"}
    )


@dataclass(frozen=True)
class ValBound:
    """One calmness bound on val: its value, or None with the reason it cannot be formed."""
    name: str
    target: str
    value: float | None
    formula: str
    reason: str = ""

    def to_record(self) -> dict[str, Any]:
        rec = {"name": self.name, "target": self.target, "value": fmt_value(self.value), "formula": self.formula}
        if self.reason:
            rec["reason"] = self.reason
        return rec


@dataclass(frozen=True)
class ValCalmnessReport:
    pbar: tuple[float, ...]
    xbar: tuple[float, ...]
    value: float
    empirical: dict[str, ModulusEstimate]
    components: dict[str, ModulusEstimate | SlopeEstimate]
    bounds: dict[str, ValBound]
    meta: dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> dict[str, Any]:
        return {
            "pbar": list(self.pbar),
            "xbar": list(self.xbar),
            "value": fmt_value(self.value),
            "empirical": {k: v.to_record() for k, v in sorted(self.empirical.items())},
            "components": {k: v.to_record() for k, v in sorted(self.components.items())},
            "bounds": {k: v.to_record() for k, v in sorted(self.bounds.items())},
            **({"meta": self.meta} if self.meta else {}),
        }


def _slope_value(est: SlopeEstimate, tol: Tolerances) -> tuple[float | None, str]:
    if est.is_finite and est.value <= tol.positivity:
        return None, f"{est.kind} is not positive ({est.value:.3g})"
    if est.is_finite and not est.usable:
        return None, f"{est.kind} is {est.verdict}"
    return est.value, ""


def _times_max1(lip: ModulusEstimate, num: ModulusEstimate, slope: float | None, slope_reason: str,
                name: str, target: str, formula: str) -> ValBound:
    if slope is None:
        return ValBound(name, target, None, formula, slope_reason)
    for est in (lip, num):
        if not est.usable:
            return ValBound(name, target, None, formula, f"{est.kind} is {est.verdict}")
    ratio = bound_ratio(num.value, slope)
    if ratio is None:
        return ValBound(name, target, None, formula, "ratio is undefined")
    return ValBound(name, target, lip.value * max(1.0, ratio), formula)


def val_calmness_report(
    instance: InclusionInstance,
    theta: Objective | None = None,
    pbar: Any = None,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    tau_region: Box | None = None,
    grid_n: int = VAL_CALM_GRID_N,
) -> ValCalmnessReport:
    """Empirical calmness of val at pbar next to the three bounds built from slopes and moduli.

    ucalm(val) <= ucalm(theta) * max{1, Lipusc F(., xbar)(pbar) / sostslx}
    lcalm(val) <= lip theta * max{1, lip_p F(pbar) / tau}
    calm(val)  <= lip theta * max{1, lip_p F(pbar) / min{sostslx, tau}}
    """
    theta = _objective(instance, theta)
    tol = instance.tolerances
    pbar = instance.pbar if pbar is None else as_vector(pbar, instance.F.p_dim, name="pbar")
    xbar = instance.xbar
    base = value_at(instance, theta, pbar)
    if base.status != ATTAINED:
        raise InstanceError(f"instance {instance.id}: val(pbar) is not attained ({base.status})")
    slack = max(tol.value, 1e-6) * (1.0 + abs(base.value))
    if theta(pbar, xbar) > base.value + slack or not instance.x_window.contains(xbar):
        raise InstanceError(f"instance {instance.id}: xbar is not a minimizer at pbar")

    cache: dict[tuple[float, ...], float] = {}

    def val(p: np.ndarray) -> float:
        key = tuple(np.asarray(p, dtype=float).reshape(-1).tolist())
        if key not in cache:
            cache[key] = value_at(instance, theta, key).value
        return cache[key]

    ucalm, lcalm, calm = scalar_calm_moduli(val, pbar, delta_schedule, grid_n, tol, dim=instance.F.p_dim)
    region = tau_region or instance.x_window
    components = {
        "ucalm_theta": calmness_from_above_theta(theta, pbar, xbar, delta_schedule, tol=tol),
        "lip_theta": lipschitz_theta(theta, instance.p_window, instance.x_window, tol=tol),
        "lipusc_F": lipusc_modulus(
            SliceParamMap(instance.F, "p", xbar, tol.membership), pbar, delta_schedule, tol=tol
        ),
        "sostslx": partial_strict_outer_slope(instance.F, instance.C, pbar, xbar, tol=tol, seed=instance.seed),
        "lip_p_F": lip_p_modulus(instance.F, pbar, instance.x_window, delta_schedule, tol=tol),
        "tau": tau(instance.F, instance.C, pbar, region, tol=tol, seed=instance.seed),
    }
    s_val, s_reason = _slope_value(components["sostslx"], tol)
    t_val, t_reason = _slope_value(components["tau"], tol)
    if s_val is None or t_val is None:
        m_val, m_reason = None, s_reason or t_reason
    else:
        m_val, m_reason = min(s_val, t_val), ""
    bounds = {
        "ucalm": _times_max1(
            components["ucalm_theta"], components["lipusc_F"], s_val, s_reason, "ucalm", "ucalm(val)",
            "ucalm(theta) * max{1, Lipusc F(., xbar)(pbar) / sostslx}",
        ),
        "lcalm": _times_max1(
            components["lip_theta"], components["lip_p_F"], t_val, t_reason, "lcalm", "lcalm(val)",
            "lip theta * max{1, lip_p F(pbar) / tau}",
        ),
        "calm": _times_max1(
            components["lip_theta"], components["lip_p_F"], m_val, m_reason, "calm", "calm(val)",
            "lip theta * max{1, lip_p F(pbar) / min{sostslx, tau}}",
        ),
    }
    return ValCalmnessReport(
        tuple(pbar.tolist()),
        tuple(xbar.tolist()),
        base.value,
        {"ucalm": ucalm, "lcalm": lcalm, "calm": calm},
        components,
        bounds,
        {"tau_region": region.to_record(), "objective": theta.name},
    )
