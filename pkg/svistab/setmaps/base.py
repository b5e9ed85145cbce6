"""Base class for set-valued mappings F: P x X => Y."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Callable

import numpy as np

from ..errors import InstanceError, SviError
from ..geometry import ConvexBody
from ..geometry.base import as_vector


class SetMap(ABC):
    """An evaluable set-valued mapping (p, x) -> nonempty closed convex body.

    Subclasses implement ``_evaluate`` on validated vectors. The metadata
    flags are caller-asserted; ``concave_in_x`` is spot-checked when an
    instance is built.
    """

    kind: str = "unknown"

    def __init__(
        self,
        p_dim: int,
        x_dim: int,
        y_dim: int,
        lipschitz_p_hint: float | None = None,
        concave_in_x: bool = False,
        lsc_in_x: bool = True,
    ):
        self.p_dim = int(p_dim)
        self.x_dim = int(x_dim)
        self.y_dim = int(y_dim)
        self.lipschitz_p_hint = lipschitz_p_hint
        self.concave_in_x = concave_in_x
        self.lsc_in_x = lsc_in_x

    @abstractmethod
    def _evaluate(self, p: np.ndarray, x: np.ndarray) -> ConvexBody:
        raise NotImplementedError

    @abstractmethod
    def _params_record(self) -> dict[str, Any]:
        """Kind-specific fields of the tagged record."""
        raise NotImplementedError

    @property
    def depends_on_p(self) -> bool:
        return True

    def evaluate(self, p: Any, x: Any) -> ConvexBody:
        """The set F(p, x)."""
        p = as_vector(p, self.p_dim, name="p")
        x = as_vector(x, self.x_dim, name="x")
        try:
            body = self._evaluate(p, x)
        except SviError:
            raise
        except Exception as e:
            raise InstanceError(f"{self.kind} map failed at p={p.tolist()}, x={x.tolist()}: {e}") from e
        if body.dim != self.y_dim:
            raise InstanceError(f"{self.kind} map returned a {body.dim}-D set, expected {self.y_dim}-D")
        return body

    def slice_x(self, p: Any) -> Callable[[Any], ConvexBody]:
        """x -> F(p, x) with p frozen."""
        return lambda x: self.evaluate(p, x)

    def slice_p(self, x: Any) -> Callable[[Any], ConvexBody]:
        """p -> F(p, x) with x frozen."""
        return lambda p: self.evaluate(p, x)

    def to_record(self) -> dict[str, Any]:
        rec = {"kind": self.kind, "p_dim": self.p_dim, "x_dim": self.x_dim, "y_dim": self.y_dim}
        rec.update(self._params_record())
        if self.lipschitz_p_hint is not None:
            rec["lipschitz_p_hint"] = self.lipschitz_p_hint
        rec["concave_in_x"] = self.concave_in_x
        return rec

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._params_record()})"
