"""Polyhedral convex bodies: conv(points) + cone(rays)."""

from __future__ import annotations

import itertools
import math
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from scipy.linalg import null_space

from ..errors import DimensionError, InputError
from .base import ConvexBody, as_point_array, as_vector, snap_zero
from .hrep import cone_generators, enumerate_vertices, halfspaces_of, normalize_rows

COEF_TOL = 1e-12


def _fmt_bound(value: float) -> float | None:
    return None if math.isinf(value) else float(value)


class VPolyhedron(ConvexBody):
    """Polyhedron in V-representation conv(points) + cone(rays)."""

    kind = "vpolyhedron"

    def __init__(self, points: Any, rays: Any = None, dim: int | None = None):
        pts = as_point_array(points, dim, name="points")
        if len(pts) == 0:
            raise InputError("a polyhedron needs at least one point")
        m = pts.shape[1]
        if rays is None or len(np.atleast_1d(rays)) == 0:
            rr = np.empty((0, m))
        else:
            rr = as_point_array(rays, m, name="rays")
        if len(rr) and np.any(np.linalg.norm(rr, axis=1) <= 1e-12):
            raise InputError("recession generators must be nonzero")
        self._points = np.unique(pts, axis=0)
        self._rays = rr
        self._points.setflags(write=False)

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def rays(self) -> np.ndarray:
        return self._rays

    def recession_rays(self) -> np.ndarray:
        return self._rays

    def support(self, direction: np.ndarray) -> float:
        d = as_vector(direction, self.dim, name="direction")
        if len(self._rays) and np.any(self._rays @ d > 1e-12):
            return math.inf
        return float(np.max(self._points @ d))

    def interval_bounds(self) -> tuple[float, float]:
        if self.dim != 1:
            raise DimensionError("interval bounds exist only in 1-D", 1, self.dim)
        lo = float(self._points.min())
        hi = float(self._points.max())
        if len(self._rays):
            if np.any(self._rays[:, 0] < 0):
                lo = -math.inf
            if np.any(self._rays[:, 0] > 0):
                hi = math.inf
        return lo, hi

    @cached_property
    def hrep(self) -> tuple[np.ndarray, np.ndarray]:
        """Facet description (A, b) with unit-normal rows, A x <= b."""
        if self.dim == 1:
            lo, hi = self.interval_bounds()
            rows, rhs = [], []
            if not math.isinf(hi):
                rows.append([1.0])
                rhs.append(hi)
            if not math.isinf(lo):
                rows.append([-1.0])
                rhs.append(-lo)
            return np.array(rows, dtype=float).reshape(-1, 1), np.array(rhs, dtype=float)
        return halfspaces_of(self._points, self._rays)

    @cached_property
    def _projection_groups(self) -> list[tuple]:
        """Pseudo-inverses for every affinely independent generator subset.

        The projection onto the body lies in the relative interior of a face
        spanned by at most m + 1 generators; projecting onto the affine hull
        of each subset and keeping the feasible ones is exact.
        """
        m = self.dim
        pts, rays = self._points, self._rays
        groups = []
        for k_pts in range(1, min(len(pts), m + 1) + 1):
            for k_rays in range(0, min(len(rays), m + 1 - k_pts) + 1):
                p0s, mats, pinvs = [], [], []
                for pi in itertools.combinations(range(len(pts)), k_pts):
                    base = pts[pi[0]]
                    cols = [pts[i] - base for i in pi[1:]]
                    for ri in itertools.combinations(range(len(rays)), k_rays):
                        full = cols + [rays[j] for j in ri]
                        if not full:
                            p0s.append(base)
                            mats.append(np.zeros((m, 0)))
                            pinvs.append(np.zeros((0, m)))
                            continue
                        M = np.column_stack(full)
                        if np.linalg.matrix_rank(M, tol=1e-10) < M.shape[1]:
                            continue
                        p0s.append(base)
                        mats.append(M)
                        pinvs.append(np.linalg.pinv(M))
                if p0s:
                    groups.append((k_pts - 1, np.array(p0s), np.array(mats), np.array(pinvs)))
        return groups

    def nearest(self, x: Any) -> np.ndarray:
        """Euclidean projection of x onto the body."""
        x = self._check_point(x)
        best, best_d = None, math.inf
        for n_aff, p0, mats, pinvs in self._projection_groups:
            diff = x[None, :] - p0
            coef = np.einsum("gij,gj->gi", pinvs, diff)
            lam = coef[:, :n_aff]
            ok = np.all(coef >= -COEF_TOL, axis=1) & (lam.sum(axis=1) <= 1.0 + COEF_TOL)
            if not np.any(ok):
                continue
            proj = p0[ok] + np.einsum("gij,gj->gi", mats[ok], coef[ok])
            dists = np.linalg.norm(proj - x[None, :], axis=1)
            i = int(np.argmin(dists))
            if dists[i] < best_d:
                best, best_d = proj[i], float(dists[i])
        return best

    def distance(self, x: Any) -> float:
        x = self._check_point(x)
        if self.dim == 1:
            lo, hi = self.interval_bounds()
            return float(max(lo - x[0], x[0] - hi, 0.0))
        if len(self._points) == 1 and len(self._rays) == 0:
            return snap_zero(float(np.linalg.norm(x - self._points[0])), float(np.abs(x).max()))
        proj = self.nearest(x)
        return snap_zero(float(np.linalg.norm(x - proj)), float(np.abs(x).max()))

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "points": self._points.tolist(),
            "rays": self._rays.tolist(),
        }


class Polytope(VPolyhedron):
    """Convex hull of finitely many vertices."""

    kind = "polytope"

    def __init__(self, vertices: Any, dim: int | None = None):
        super().__init__(vertices, None, dim)

    @classmethod
    def singleton(cls, point: Sequence[float]) -> "Polytope":
        return cls([as_vector(point)])

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "vertices": self.points.tolist()}


class PolyhedralCone(VPolyhedron):
    """Closed convex cone generated by finitely many nonzero vectors."""

    kind = "cone"

    def __init__(self, generators: Any, dim: int | None = None):
        gens = np.asarray(generators, dtype=float)
        if gens.size == 0:
            if dim is None:
                raise InputError("an empty cone needs an explicit dimension")
            gens = np.empty((0, dim))
        else:
            gens = as_point_array(gens, dim, name="generators")
        m = gens.shape[1]
        super().__init__(np.zeros((1, m)), gens, m)

    @property
    def generators(self) -> np.ndarray:
        return self.rays

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "generators": self.rays.tolist(), "dim": self.dim}


class ShiftedCone(VPolyhedron):
    """apex + cone."""

    kind = "shifted_cone"

    def __init__(self, apex: Any, cone: PolyhedralCone):
        a = as_vector(apex, cone.dim, name="apex")
        super().__init__(a.reshape(1, -1), cone.rays, cone.dim)
        self.apex = a
        self.cone = cone

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "apex": self.apex.tolist(), "cone": self.cone.to_record()}


class Interval(VPolyhedron):
    """Closed interval [lo, hi] of the real line, ends possibly infinite."""

    kind = "interval"

    def __init__(self, lo: float | None = -math.inf, hi: float | None = math.inf):
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi) or lo == math.inf or hi == -math.inf:
            raise InputError(f"invalid interval ends ({lo}, {hi})")
        if lo > hi:
            raise InputError(f"interval lo {lo} exceeds hi {hi}")
        finite = [v for v in (lo, hi) if not math.isinf(v)] or [0.0]
        rays = []
        if math.isinf(lo):
            rays.append([-1.0])
        if math.isinf(hi):
            rays.append([1.0])
        super().__init__(np.array(finite).reshape(-1, 1), rays or None, 1)
        self.lo = lo
        self.hi = hi

    def interval_bounds(self) -> tuple[float, float]:
        return self.lo, self.hi

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "lo": _fmt_bound(self.lo), "hi": _fmt_bound(self.hi)}


class HPolyhedron(VPolyhedron):
    """Intersection of halfspaces normal . x <= offset."""

    kind = "hpolyhedron"

    def __init__(self, normals: Any, offsets: Any):
        A = np.asarray(normals, dtype=float)
        b = np.asarray(offsets, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.size:
            raise DimensionError("need one offset per halfspace normal")
        as_point_array(A, name="normals")
        m = A.shape[1]
        lineality = null_space(A) if len(A) else np.eye(m)
        if lineality.size:
            eq = lineality.T
            A_ext = np.vstack([A, eq, -eq])
            b_ext = np.concatenate([b, np.zeros(2 * len(eq))])
        else:
            A_ext, b_ext = A, b
        if m == 1 or len(A) == 0:
            pts = self._points_1d_or_free(A, b, m)
        else:
            pts = enumerate_vertices(A_ext, b_ext)
        if len(pts) == 0:
            raise InputError("halfspace system is empty or has no minimal face")
        rays = cone_generators(A) if len(A) else np.vstack([np.eye(m), -np.eye(m)])
        super().__init__(pts, rays if len(rays) else None, m)
        self._normals = A
        self._offsets = b

    @staticmethod
    def _points_1d_or_free(A: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
        if len(A) == 0:
            return np.zeros((1, m))
        lo, hi = -math.inf, math.inf
        for (a,), rhs in zip(A, b):
            if a > 0:
                hi = min(hi, rhs / a)
            elif a < 0:
                lo = max(lo, rhs / a)
            elif rhs < 0:
                return np.empty((0, 1))
        if lo > hi:
            return np.empty((0, 1))
        finite = [v for v in (lo, hi) if not math.isinf(v)] or [0.0]
        return np.array(finite).reshape(-1, 1)

    @cached_property
    def hrep(self) -> tuple[np.ndarray, np.ndarray]:
        return normalize_rows(self._normals, self._offsets)

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "halfspaces": [
                {"normal": a.tolist(), "offset": float(c)}
                for a, c in zip(self._normals, self._offsets)
            ],
        }
