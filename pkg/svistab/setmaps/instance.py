"""Problem instances: find x with F(p, x) inside C, near a reference solution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..config import DEFAULT_SEED, DEFAULT_TOLERANCES, Tolerances
from ..errors import DimensionError, InstanceError
from ..geometry import Box, ConeSpec, sphere_directions
from ..geometry.base import as_vector
from .base import SetMap
from .solution import phi

# Random segments used to spot-check concavity in x
CONCAVITY_SEGMENTS = 20
CONCAVITY_DIRS = 32


@dataclass(frozen=True)
class ConcavityViolation:
    p: tuple[float, ...]
    x1: tuple[float, ...]
    x2: tuple[float, ...]
    t: float
    direction: tuple[float, ...]
    gap: float


def concavity_violations(
    F: SetMap,
    x_window: Box,
    p_window: Box,
    n_segments: int = CONCAVITY_SEGMENTS,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-9,
) -> list[ConcavityViolation]:
    """Check F(p, t x1 + (1-t) x2) inside t F(p, x1) + (1-t) F(p, x2) on random segments.

    Support functions are additive under Minkowski sums, so the inclusion
    reduces to comparing supports along sampled directions.
    """
    rng = np.random.default_rng(seed)
    dirs = sphere_directions(F.y_dim, CONCAVITY_DIRS, seed)
    found = []
    for _ in range(n_segments):
        p = rng.uniform(p_window.lo, p_window.hi)
        x1 = rng.uniform(x_window.lo, x_window.hi)
        x2 = rng.uniform(x_window.lo, x_window.hi)
        t = float(rng.uniform(0.0, 1.0))
        mid = F.evaluate(p, t * x1 + (1 - t) * x2)
        a, b = F.evaluate(p, x1), F.evaluate(p, x2)
        for d in dirs:
            lhs = mid.support(d)
            rhs = t * a.support(d) + (1 - t) * b.support(d)
            if lhs > rhs + tol * max(1.0, abs(rhs) if np.isfinite(rhs) else 1.0):
                found.append(ConcavityViolation(
                    tuple(p.tolist()), tuple(x1.tolist()), tuple(x2.tolist()), t,
                    tuple(d.tolist()), float(lhs - rhs),
                ))
                break
    return found


@dataclass(frozen=True, eq=False)
class InclusionInstance:
    """A parameterized inclusion F(p, x) in C with reference solution (pbar, xbar)."""
    id: str
    F: SetMap
    C: ConeSpec
    pbar: np.ndarray
    xbar: np.ndarray
    x_window: Box
    p_window: Box
    objective: Any = None
    tolerances: Tolerances = DEFAULT_TOLERANCES
    seed: int = DEFAULT_SEED
    description: str = ""
    concavity_checked: bool = field(default=False, init=False)

    def __post_init__(self):
        F = self.F
        object.__setattr__(self, "pbar", as_vector(self.pbar, F.p_dim, name="pbar"))
        object.__setattr__(self, "xbar", as_vector(self.xbar, F.x_dim, name="xbar"))
        if self.C.dim != F.y_dim:
            raise DimensionError(f"instance {self.id}: cone dimension does not match F", F.y_dim, self.C.dim)
        if self.x_window.dim != F.x_dim:
            raise DimensionError(f"instance {self.id}: x_window dimension", F.x_dim, self.x_window.dim)
        if self.p_window.dim != F.p_dim:
            raise DimensionError(f"instance {self.id}: p_window dimension", F.p_dim, self.p_window.dim)
        if not self.x_window.contains(self.xbar):
            raise InstanceError(f"instance {self.id}: x_window does not contain xbar")
        if not self.p_window.contains(self.pbar):
            raise InstanceError(f"instance {self.id}: p_window does not contain pbar")
        value = phi(F, self.C, self.pbar, self.xbar, self.tolerances)
        if value > self.tolerances.membership:
            raise InstanceError(
                f"instance {self.id}: xbar is not a solution at pbar (phi = {value:.3g})"
            )
        if F.concave_in_x:
            bad = concavity_violations(F, self.x_window, self.p_window, seed=self.seed,
                                       tol=self.tolerances.membership)
            if bad:
                v = bad[0]
                raise InstanceError(
                    f"instance {self.id}: F flagged concave in x but the segment "
                    f"x1={list(v.x1)}, x2={list(v.x2)}, t={v.t:.3f} violates it by {v.gap:.3g}"
                )
            object.__setattr__(self, "concavity_checked", True)

    @property
    def x_half_width(self) -> float:
        return self.x_window.half_width

    def phi(self, p: Any, x: Any) -> float:
        return phi(self.F, self.C, p, x, self.tolerances)

    def with_tolerances(self, tolerances: Tolerances) -> "InclusionInstance":
        return InclusionInstance(
            self.id, self.F, self.C, self.pbar, self.xbar, self.x_window, self.p_window,
            self.objective, tolerances, self.seed, self.description,
        )

    def with_seed(self, seed: int) -> "InclusionInstance":
        return InclusionInstance(
            self.id, self.F, self.C, self.pbar, self.xbar, self.x_window, self.p_window,
            self.objective, self.tolerances, seed, self.description,
        )
