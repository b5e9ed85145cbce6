"""Closed r-enlargements B(S, r) of convex bodies."""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from ..errors import InputError
from .base import ConvexBody, as_vector


class Enlargement(ConvexBody):
    """B(S, r) = {y : dist(y, S) <= r}."""

    kind = "enlargement"

    def __init__(self, base: ConvexBody, radius: float):
        radius = float(radius)
        if not math.isfinite(radius) or radius < 0:
            raise InputError(f"enlargement radius must be finite and >= 0, got {radius}")
        self.base = base
        self.radius = radius

    @property
    def dim(self) -> int:
        return self.base.dim

    def distance(self, x: Any) -> float:
        return max(0.0, self.base.distance(x) - self.radius)

    def support(self, direction: Any) -> float:
        d = as_vector(direction, self.dim, name="direction")
        return self.base.support(d) + self.radius * float(np.linalg.norm(d))

    def recession_rays(self) -> np.ndarray:
        return self.base.recession_rays()

    def interval_bounds(self) -> tuple[float, float]:
        lo, hi = self.base.interval_bounds()
        return lo - self.radius, hi + self.radius

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "base": self.base.to_record(), "radius": self.radius}
