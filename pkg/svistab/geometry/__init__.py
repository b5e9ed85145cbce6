"""Convex bodies in R^m and the metric quantities between them."""

from __future__ import annotations

from typing import Any, Callable

from ..errors import InputError
from .base import Box, ConvexBody, as_vector, product_grid, sphere_directions, unit_grid
from .cones import ConeSpec
from .enlargement import Enlargement
from .metrics import (
    IdentityCheck,
    SupportBound,
    dist_point_set,
    excess,
    excess_identities_check,
    hausdorff,
    includes,
    minkowski_sum,
    support_distance_bound,
)
from .polyhedra import HPolyhedron, Interval, PolyhedralCone, Polytope, ShiftedCone, VPolyhedron


def _enlargement_from_record(rec: dict[str, Any]) -> Enlargement:
    return Enlargement(body_from_record(rec["base"]), rec["radius"])


def _shifted_cone_from_record(rec: dict[str, Any]) -> ShiftedCone:
    return ShiftedCone(rec["apex"], body_from_record({"kind": "cone", **rec["cone"]}))


BODY_KINDS: dict[str, Callable[[dict[str, Any]], ConvexBody]] = {
    "interval": lambda rec: Interval(rec.get("lo"), rec.get("hi")),
    "polytope": lambda rec: Polytope(rec["vertices"]),
    "cone": lambda rec: PolyhedralCone(rec.get("generators", []), dim=rec.get("dim")),
    "shifted_cone": _shifted_cone_from_record,
    "hpolyhedron": lambda rec: HPolyhedron(
        [h["normal"] for h in rec["halfspaces"]], [h["offset"] for h in rec["halfspaces"]]
    ),
    "vpolyhedron": lambda rec: VPolyhedron(rec["points"], rec.get("rays") or None),
    "enlargement": _enlargement_from_record,
}


def body_from_record(rec: dict[str, Any]) -> ConvexBody:
    """Build a body from its tagged record, e.g. {"kind": "interval", "lo": -1, "hi": null}."""
    kind = rec.get("kind")
    builder = BODY_KINDS.get(kind)
    if builder is None:
        raise InputError(f"unknown body kind {kind!r}; expected one of {sorted(BODY_KINDS)}")
    try:
        return builder(rec)
    except KeyError as e:
        raise InputError(f"{kind} record is missing field {e.args[0]!r}") from e


__all__ = [
    "BODY_KINDS", "Box", "ConeSpec", "ConvexBody", "Enlargement", "HPolyhedron", "IdentityCheck",
    "Interval", "PolyhedralCone", "Polytope", "ShiftedCone", "SupportBound", "VPolyhedron", "as_vector",
    "body_from_record", "dist_point_set", "excess", "excess_identities_check", "hausdorff",
    "includes", "minkowski_sum", "product_grid", "sphere_directions", "support_distance_bound",
    "unit_grid",
]
