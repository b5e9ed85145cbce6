"""Small catalog of set-valued maps used as reference instances."""

from __future__ import annotations

import math
from typing import Any, Callable

import numpy as np

from ..errors import InputError
from ..geometry import ConvexBody, Interval
from .base import SetMap

VARIABLES = ("p", "x")


def _pick(variable: str, p: np.ndarray, x: np.ndarray) -> float:
    return float(p[0] if variable == "p" else x[0])


class ConstantMap(SetMap):
    """F(p, x) = S for every (p, x)."""

    kind = "constant"

    def __init__(self, S: ConvexBody, p_dim: int = 1, x_dim: int = 1):
        super().__init__(p_dim, x_dim, S.dim, lipschitz_p_hint=0.0, concave_in_x=True, lsc_in_x=True)
        self.S = S

    @property
    def depends_on_p(self) -> bool:
        return False

    def _evaluate(self, p: np.ndarray, x: np.ndarray) -> ConvexBody:
        return self.S

    def _params_record(self) -> dict[str, Any]:
        return {"set": self.S.to_record()}


class _ScalarSwitchMap(SetMap):
    """1-D valued map driven by one scalar variable, p or x."""

    def __init__(self, variable: str = "p", p_dim: int = 1, x_dim: int = 1, **flags):
        if variable not in VARIABLES:
            raise InputError(f"variable must be one of {VARIABLES}, got {variable!r}")
        super().__init__(p_dim, x_dim, 1, **flags)
        self.variable = variable

    @property
    def depends_on_p(self) -> bool:
        return self.variable == "p"

    def _params_record(self) -> dict[str, Any]:
        return {"variable": self.variable}


class SqrtIntervalMap(_ScalarSwitchMap):
    """v -> [-sqrt|v|, sqrt|v|]: Lipschitz u.s.c. fails at 0."""

    kind = "sqrt_interval"

    def _evaluate(self, p: np.ndarray, x: np.ndarray) -> Interval:
        r = math.sqrt(abs(_pick(self.variable, p, x)))
        return Interval(-r, r)


class HalflineSignMap(_ScalarSwitchMap):
    """v -> (-inf, 0] for v < 0, R at 0, [0, +inf) for v > 0.

    Lipschitz u.s.c. at 0 with modulus 0, yet not locally Lipschitz there.
    """

    kind = "halfline_sign"

    def _evaluate(self, p: np.ndarray, x: np.ndarray) -> Interval:
        v = _pick(self.variable, p, x)
        if v < 0:
            return Interval(None, 0.0)
        if v > 0:
            return Interval(0.0, None)
        return Interval(None, None)


class CustomMap(SetMap):
    """Wraps a user closure (p, x) -> ConvexBody; closedness and flags are caller-asserted."""

    kind = "custom"

    def __init__(
        self,
        evaluator: Callable[[np.ndarray, np.ndarray], ConvexBody],
        p_dim: int,
        x_dim: int,
        y_dim: int,
        name: str = "custom",
        **flags,
    ):
        super().__init__(p_dim, x_dim, y_dim, **flags)
        self.evaluator = evaluator
        self.name = name

    def _evaluate(self, p: np.ndarray, x: np.ndarray) -> ConvexBody:
        return self.evaluator(p, x)

    def _params_record(self) -> dict[str, Any]:
        return {"name": self.name}
