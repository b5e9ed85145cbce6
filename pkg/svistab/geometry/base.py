"""Base types for convex bodies and windows."""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..config import MAX_DIM
from ..errors import DimensionError, InputError

# Relative rounding floor below which computed distances are snapped to zero
SNAP_RTOL = 64 * np.finfo(float).eps


def as_vector(values: Any, dim: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce to a finite, read-only 1-D float array of dimension <= MAX_DIM."""
    arr = np.atleast_1d(np.asarray(values, dtype=float)).reshape(-1)
    if arr.size == 0:
        raise DimensionError(f"{name} must have at least one coordinate")
    if arr.size > MAX_DIM:
        raise DimensionError(f"{name} exceeds the dimension cap {MAX_DIM}", MAX_DIM, arr.size)
    if dim is not None and arr.size != dim:
        raise DimensionError(f"{name} has the wrong dimension", dim, arr.size)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must have finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def as_point_array(values: Any, dim: int | None = None, name: str = "points") -> np.ndarray:
    """Coerce a list of points to a read-only (k, m) float array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a list of vectors")
    if arr.shape[1] > MAX_DIM:
        raise DimensionError(f"{name} exceed the dimension cap {MAX_DIM}", MAX_DIM, arr.shape[1])
    if dim is not None and arr.shape[0] and arr.shape[1] != dim:
        raise DimensionError(f"{name} have the wrong dimension", dim, arr.shape[1])
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must have finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def snap_zero(value: float, scale: float = 1.0) -> float:
    """Round distances that are pure floating-point residue down to zero."""
    if value <= SNAP_RTOL * max(1.0, scale):
        return 0.0
    return float(value)


def check_same_dim(*bodies: "ConvexBody") -> int:
    dims = {b.dim for b in bodies}
    if len(dims) != 1:
        raise DimensionError(f"bodies live in different dimensions: {sorted(dims)}")
    return dims.pop()


class ConvexBody(ABC):
    """A nonempty closed convex subset of R^m with an exact finite description."""

    kind: str = "unknown"

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient dimension m."""
        raise NotImplementedError

    @abstractmethod
    def distance(self, x: np.ndarray) -> float:
        """Euclidean distance from x to the body."""
        raise NotImplementedError

    @abstractmethod
    def support(self, direction: np.ndarray) -> float:
        """Support function value, possibly +inf."""
        raise NotImplementedError

    @abstractmethod
    def recession_rays(self) -> np.ndarray:
        """Generators (k, m) of the recession cone; k may be 0."""
        raise NotImplementedError

    @abstractmethod
    def interval_bounds(self) -> tuple[float, float]:
        """(lo, hi) of a 1-D body, with infinite ends for unbounded sides."""
        raise NotImplementedError

    @abstractmethod
    def to_record(self) -> dict[str, Any]:
        """Tagged JSON record of this body."""
        raise NotImplementedError

    @property
    def is_bounded(self) -> bool:
        return len(self.recession_rays()) == 0

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return self.distance(x) <= tol

    def _check_point(self, x: Any) -> np.ndarray:
        return as_vector(x, self.dim, name="point")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_record()})"


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned window [lo, hi] in R^d."""
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lo, name="box lo")
        hi = as_vector(self.hi, lo.size, name="box hi")
        if np.any(lo > hi):
            raise InputError("box lo must not exceed hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def around(cls, center: Sequence[float], half_width: float) -> "Box":
        c = as_vector(center, name="box center")
        return cls(c - half_width, c + half_width)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def half_width(self) -> float:
        """Smallest half side length."""
        return float(np.min(self.hi - self.lo) / 2.0)

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def grid(self, n: int) -> np.ndarray:
        """Tensor grid with n points per axis, shape (n**d, d)."""
        axes = [np.linspace(lo, hi, n) for lo, hi in zip(self.lo, self.hi)]
        return np.array(list(itertools.product(*axes)), dtype=float)

    def to_record(self) -> dict[str, Any]:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


def unit_grid(dim: int, n: int, budget: int | None = None) -> np.ndarray:
    """Points of the unit ball on a tensor grid of [-1, 1]^dim.

    The per-axis count is odd so that the origin is on the grid, and is
    reduced so that the total stays within ``budget``.
    """
    if budget is not None and dim > 1:
        n = min(n, max(3, int(math.floor(budget ** (1.0 / dim)))))
    if n % 2 == 0:
        n += 1
    axis = np.linspace(-1.0, 1.0, n)
    pts = np.array(list(itertools.product(axis, repeat=dim)), dtype=float)
    return pts[np.linalg.norm(pts, axis=1) <= 1.0 + 1e-12]


def product_grid(dim_a: int, dim_b: int, n: int, budget: int | None = None) -> np.ndarray:
    """Points of B_a x B_b, the product of two unit balls, as rows [a, b]."""
    if budget is not None:
        n = min(n, max(3, int(math.floor(budget ** (1.0 / (dim_a + dim_b))))))
    a, b = unit_grid(dim_a, n), unit_grid(dim_b, n)
    return np.hstack([np.repeat(a, len(b), axis=0), np.tile(b, (len(a), 1))])


def sphere_directions(dim: int, n: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit directions: exact {-1, +1} in 1-D, evenly spaced in 2-D,
    coordinate axes plus seeded Gaussian directions above."""
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(angles), np.sin(angles)])
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((max(n - len(axes), 0), dim))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.vstack([axes, extra])
