"""Distances, excess and Hausdorff distance between convex bodies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import InputError
from .base import ConvexBody, check_same_dim, sphere_directions
from .cones import ConeSpec
from .enlargement import Enlargement
from .polyhedra import PolyhedralCone, ShiftedCone, VPolyhedron

# Absolute tolerance for recession-cone containment
RECESSION_TOL = 1e-9

# Identity checks use this many extra sampled directions per vertex
IDENTITY_DIRS_N = 128


def _body(obj: Any) -> ConvexBody:
    if isinstance(obj, ConeSpec):
        return obj.cone
    if not isinstance(obj, ConvexBody):
        raise InputError(f"expected a convex body, got {type(obj).__name__}")
    return obj


def dist_point_set(x: Any, S: Any) -> float:
    """Euclidean distance from x to S."""
    return _body(S).distance(x)


def recession_contained(A: ConvexBody, B: ConvexBody) -> bool:
    """Whether every recession direction of A is a recession direction of B."""
    rays = A.recession_rays()
    if len(rays) == 0:
        return True
    rec_b = PolyhedralCone(B.recession_rays(), dim=B.dim)
    return all(rec_b.distance(d) <= RECESSION_TOL * max(1.0, float(np.linalg.norm(d))) for d in rays)


def _excess_1d(A: ConvexBody, B: ConvexBody) -> float:
    a_lo, a_hi = A.interval_bounds()
    b_lo, b_hi = B.interval_bounds()
    if (math.isinf(a_lo) and not math.isinf(b_lo)) or (math.isinf(a_hi) and not math.isinf(b_hi)):
        return math.inf
    gaps = [0.0]
    if not math.isinf(b_lo):
        gaps.append(b_lo - a_lo)
    if not math.isinf(b_hi):
        gaps.append(a_hi - b_hi)
    return float(max(gaps))


def _excess_of_enlargement(A: Enlargement, B: ConvexBody, tol: float) -> float:
    """e(B(S, r), B) for polyhedral B.

    Outside B the excess grows by exactly r; when S sits inside B the worst
    point of B(S, r) is the one that escapes the shallowest facet.
    """
    inner = excess(A.base, B, tol)
    if math.isinf(inner):
        return math.inf
    if inner > tol:
        return inner + A.radius
    if not isinstance(B, VPolyhedron):
        raise InputError(f"cannot measure excess of an enlargement over {B.kind}")
    normals, offsets = B.hrep
    if len(normals) == 0:
        return 0.0
    depth = min(float(b - A.base.support(a)) for a, b in zip(normals, offsets))
    return max(0.0, A.radius - max(depth, 0.0))


def excess(A: Any, B: Any, tol: float = 1e-9) -> float:
    """e(A, B) = sup over a in A of dist(a, B); +inf when A escapes B at infinity."""
    A, B = _body(A), _body(B)
    check_same_dim(A, B)
    if A.dim == 1:
        return _excess_1d(A, B)
    if isinstance(B, Enlargement):
        return max(0.0, excess(A, B.base, tol) - B.radius)
    if isinstance(A, Enlargement):
        return _excess_of_enlargement(A, B, tol)
    if not recession_contained(A, B):
        return math.inf
    if not isinstance(A, VPolyhedron):
        raise InputError(f"unsupported body kind {A.kind}")
    # dist(., B) is convex, so its sup over conv(points) + rec(B) sits at a point
    return float(max(B.distance(v) for v in A.points))


def hausdorff(A: Any, B: Any, tol: float = 1e-9) -> float:
    return max(excess(A, B, tol), excess(B, A, tol))


def includes(outer: Any, inner: Any, tol: float = 1e-9) -> bool:
    """inner is a subset of outer up to tol."""
    return excess(inner, outer, tol) <= tol


def enlargement_contains(S: Any, r: float, x: Any, tol: float = 1e-9) -> bool:
    """x in B(S, r) up to tol."""
    if r < 0:
        raise InputError(f"enlargement radius must be >= 0, got {r}")
    return dist_point_set(x, S) <= r + tol


def minkowski_sum(S: Any, C: Any) -> ConvexBody:
    """S + C for a polyhedral (or enlarged polyhedral) S and a polyhedral cone C."""
    S = _body(S)
    cone = _body(C)
    check_same_dim(S, cone)
    if isinstance(S, Enlargement):
        return Enlargement(minkowski_sum(S.base, cone), S.radius)
    if not isinstance(S, VPolyhedron):
        raise InputError(f"Minkowski sum with a cone is not supported for {S.kind}")
    rays = np.vstack([S.rays, cone.rays]) if len(cone.rays) else S.rays
    if len(S.points) == 1 and len(S.rays) == 0:
        return ShiftedCone(S.points[0], PolyhedralCone(cone.rays, dim=cone.dim))
    return VPolyhedron(S.points, rays if len(rays) else None, S.dim)


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of an excess identity, or the reason it was skipped."""
    name: str
    lhs: float | None
    rhs: float | None
    skipped: str | None = None

    @property
    def holds(self) -> bool | None:
        if self.skipped is not None:
            return None
        if math.isinf(self.lhs) or math.isinf(self.rhs):
            return self.lhs == self.rhs
        return abs(self.lhs - self.rhs) <= 1e-9 * max(1.0, abs(self.rhs))


def _enlarged_excess_by_witnesses(S: VPolyhedron, C: ConeSpec, r: float, seed: int) -> float:
    """sup over witnesses y = v + r u of dist(y, C), with v a point of S and |u| = 1.

    Computed directly on points rather than through the enlargement rules, so
    it serves as an independent side of the identity.
    """
    cone = C.cone
    dirs = [sphere_directions(S.dim, IDENTITY_DIRS_N, seed)]
    if len(C.normals):
        dirs.append(-C.normals / np.linalg.norm(C.normals, axis=1, keepdims=True))
    best = 0.0
    for v in S.points:
        cands = list(dirs)
        proj = cone.nearest(v)
        gap = v - proj
        if np.linalg.norm(gap) > 0:
            cands.append((gap / np.linalg.norm(gap)).reshape(1, -1))
        for u in np.vstack(cands):
            best = max(best, cone.distance(v + r * u))
    return best


def excess_identities_check(S: Any, C: ConeSpec, r: float, tol: float = 1e-9, seed: int = 0) -> list[IdentityCheck]:
    """Evaluate e(S + C, C) = e(S, C) and e(B(S, r), C) = e(S, C) + r side by side."""
    S = _body(S)
    if r < 0:
        raise InputError(f"enlargement radius must be >= 0, got {r}")
    base = excess(S, C.cone, tol)
    if math.isinf(base):
        reason = "e(S, C) is infinite"
        return [IdentityCheck("sum", None, None, reason), IdentityCheck("enlargement", None, None, reason)]

    checks = [IdentityCheck("sum", excess(minkowski_sum(S, C.cone), C.cone, tol), base)]
    if base <= tol or r <= 0:
        checks.append(IdentityCheck("enlargement", None, None, "needs e(S, C) > 0 and r > 0"))
    elif not isinstance(S, VPolyhedron) or len(S.rays):
        lhs = excess(Enlargement(S, r), C.cone, tol)
        checks.append(IdentityCheck("enlargement", lhs, base + r))
    else:
        checks.append(IdentityCheck("enlargement", _enlarged_excess_by_witnesses(S, C, r, seed), base + r))
    return checks


@dataclass(frozen=True)
class SupportBound:
    """Lower estimate of dist(0, S) from the support function, beside the exact distance."""
    estimate: float
    distance: float
    directions: int

    @property
    def holds(self) -> bool:
        return self.estimate <= self.distance + 1e-9 * max(1.0, self.distance)

    @property
    def gap(self) -> float:
        return self.distance - self.estimate


def support_distance_bound(S: Any, dirs_n: int = IDENTITY_DIRS_N, seed: int = 0) -> SupportBound:
    """dist(0, S) >= -inf over unit u of sigma_S(u), with the inf over sampled u.

    Sampling only raises the inf, so the estimate stays a lower bound. The
    direction towards the nearest point of S is not added, so the estimate
    is tight only as far as the sample allows.
    """
    S = _body(S)
    dirs = sphere_directions(S.dim, dirs_n, seed)
    low = min(S.support(u) for u in dirs)
    estimate = max(0.0, -float(low))
    return SupportBound(estimate, S.distance(np.zeros(S.dim)), len(dirs))
