"""Closed convex polyhedral cones carried in both representations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import InputError
from .base import as_point_array
from .hrep import cone_generators, polar_generators
from .polyhedra import PolyhedralCone

CONTAINMENT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """A cone C = cone(generators) = {y : a . y >= 0 for every inward normal a}."""
    cone: PolyhedralCone
    normals: np.ndarray
    pointed: bool
    has_interior: bool

    @classmethod
    def build(cls, generators: Any = None, halfspaces: Any = None, dim: int | None = None) -> "ConeSpec":
        """Build from generators, inward halfspace normals, or both (cross-checked)."""
        if generators is None and halfspaces is None:
            raise InputError("a cone needs generators or halfspaces")
        if generators is not None:
            gens = np.asarray(generators, dtype=float)
            gens = np.empty((0, dim)) if gens.size == 0 else as_point_array(gens, dim, "generators")
        if halfspaces is not None:
            normals = np.asarray(halfspaces, dtype=float)
            normals = np.empty((0, dim)) if normals.size == 0 else as_point_array(normals, dim, "normals")
        if generators is None:
            gens = cone_generators(-normals)
        if halfspaces is None:
            normals = -polar_generators(gens) if len(gens) else np.vstack([np.eye(gens.shape[1]), -np.eye(gens.shape[1])])
        m = gens.shape[1]
        spec = cls(
            cone=PolyhedralCone(gens, dim=m),
            normals=normals.reshape(-1, m),
            pointed=bool(len(normals) and np.linalg.matrix_rank(normals) == m),
            has_interior=bool(len(gens) and np.linalg.matrix_rank(gens) == m),
        )
        if generators is not None and halfspaces is not None:
            spec._check_representations()
        return spec

    @classmethod
    def from_generators(cls, generators: Any, dim: int | None = None) -> "ConeSpec":
        return cls.build(generators=generators, dim=dim)

    @classmethod
    def from_halfspaces(cls, normals: Any, dim: int | None = None) -> "ConeSpec":
        return cls.build(halfspaces=normals, dim=dim)

    @classmethod
    def orthant(cls, dim: int) -> "ConeSpec":
        """The nonnegative orthant R^dim_+."""
        eye = np.eye(dim)
        return cls.build(generators=eye, halfspaces=eye)

    @classmethod
    def halfline(cls) -> "ConeSpec":
        """[0, +inf) in R."""
        return cls.orthant(1)

    def _check_representations(self) -> None:
        for g in self.cone.generators:
            if len(self.normals) and np.min(self.normals @ g) < -CONTAINMENT_TOL:
                raise InputError(f"generator {g.tolist()} violates the halfspace description")
        for g in cone_generators(-self.normals) if len(self.normals) else np.vstack([np.eye(self.dim), -np.eye(self.dim)]):
            if self.cone.distance(g) > CONTAINMENT_TOL:
                raise InputError(f"halfspace cone direction {g.tolist()} is not generated")

    @property
    def dim(self) -> int:
        return self.cone.dim

    @property
    def polar(self) -> np.ndarray:
        """Generators of the polar cone C° = {y : y . c <= 0 for c in C}."""
        return -self.normals

    @property
    def is_trivial(self) -> bool:
        """C = {0}."""
        return len(self.cone.generators) == 0

    @property
    def is_whole_space(self) -> bool:
        return len(self.normals) == 0

    def contains(self, y: Any, tol: float = 1e-9) -> bool:
        return self.cone.distance(y) <= tol

    def to_record(self) -> dict[str, Any]:
        return {
            "generators": self.cone.generators.tolist(),
            "halfspaces": self.normals.tolist(),
            "pointed": self.pointed,
            "has_interior": self.has_interior,
        }
