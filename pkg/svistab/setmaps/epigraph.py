"""Epigraphical maps F(p, x) = [f(p, x), +inf)."""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

from ..expressions import Expression
from ..geometry import Interval
from .base import SetMap


class EpigraphMap(SetMap):
    """Values are upper halflines of R; concave in x exactly when f is.

    ``f`` is either a compiled expression or a plain callable ``f(p, x)``.
    """

    kind = "epigraph"

    def __init__(
        self,
        f: Expression | Callable[[np.ndarray, np.ndarray], float],
        p_dim: int = 1,
        x_dim: int = 1,
        lipschitz_p_hint: float | None = None,
        concave_in_x: bool = False,
    ):
        # A continuous f gives an l.s.c. epigraphical map
        super().__init__(p_dim, x_dim, 1, lipschitz_p_hint, concave_in_x, lsc_in_x=True)
        self.f = f

    @classmethod
    def from_expression(cls, text: str, p_dim: int = 1, x_dim: int = 1, **kwargs) -> "EpigraphMap":
        return cls(Expression.compile(text, p_dim, x_dim), p_dim, x_dim, **kwargs)

    @property
    def depends_on_p(self) -> bool:
        return getattr(self.f, "depends_on_p", True)

    def lower(self, p: Any, x: Any) -> float:
        """f(p, x), the left end of the value."""
        return self.evaluate(p, x).lo

    def _evaluate(self, p: np.ndarray, x: np.ndarray) -> Interval:
        return Interval(self.f(p, x), None)

    def _params_record(self) -> dict[str, Any]:
        return {"f": getattr(self.f, "text", repr(self.f))}
