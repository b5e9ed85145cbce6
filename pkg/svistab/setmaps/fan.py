"""Fans generated by matrix polytopes: F(p, x) = {L x : L in conv G(p)}."""

from __future__ import annotations

from typing import Any

import numpy as np

from ..errors import DimensionError, InputError
from ..geometry import Polytope
from .base import SetMap


class FanMap(SetMap):
    """Fan of a matrix polytope with vertices L_i(p) = L_i + sum_k p_k D_ik.

    Since L -> L x is linear, the image of conv G(p) is the hull of the
    vertex images, so values are exact polytopes.
    """

    kind = "fan"

    def __init__(
        self,
        matrices: Any,
        p_dim: int = 1,
        sensitivities: Any = None,
        lipschitz_p_hint: float | None = None,
    ):
        mats = np.asarray(matrices, dtype=float)
        if mats.ndim == 2:
            mats = mats[None, :, :]
        if mats.ndim != 3 or len(mats) == 0:
            raise InputError("a fan needs a non-empty list of matrices")
        if not np.all(np.isfinite(mats)):
            raise InputError("fan matrices must have finite entries")
        k, m, n = mats.shape
        if sensitivities is None:
            sens = np.zeros((k, p_dim, m, n))
        else:
            sens = np.asarray(sensitivities, dtype=float)
            if sens.shape != (k, p_dim, m, n):
                raise DimensionError(f"sensitivities must have shape {(k, p_dim, m, n)}, got {sens.shape}")
        super().__init__(p_dim, n, m, lipschitz_p_hint, concave_in_x=True, lsc_in_x=True)
        self.matrices = mats
        self.sensitivities = sens

    @property
    def depends_on_p(self) -> bool:
        return bool(np.any(self.sensitivities))

    def matrices_at(self, p: Any) -> np.ndarray:
        """Vertex matrices of G(p), shape (k, m, n)."""
        p = np.asarray(p, dtype=float).reshape(-1)
        return self.matrices + np.einsum("k,ikmn->imn", p, self.sensitivities)

    def _evaluate(self, p: np.ndarray, x: np.ndarray) -> Polytope:
        return Polytope(self.matrices_at(p) @ x, dim=self.y_dim)

    def _params_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {"matrices": self.matrices.tolist()}
        if self.depends_on_p:
            rec["sensitivities"] = self.sensitivities.tolist()
        return rec
