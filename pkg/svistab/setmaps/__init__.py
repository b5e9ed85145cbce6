"""Set-valued mappings, excess functions and solution sets."""

from __future__ import annotations

from typing import Any, Callable

from ..errors import InputError
from ..geometry import body_from_record
from .base import SetMap
from .catalog import ConstantMap, CustomMap, HalflineSignMap, SqrtIntervalMap
from .epigraph import EpigraphMap
from .fan import FanMap
from .instance import InclusionInstance, concavity_violations
from .solution import SampledSolution, SolutionSlice, in_solution, phi, sample_solution, solve_slice_1d


def _epigraph(rec: dict[str, Any]) -> SetMap:
    return EpigraphMap.from_expression(
        rec["f"],
        rec.get("p_dim", 1),
        rec.get("x_dim", 1),
        lipschitz_p_hint=rec.get("lipschitz_p_hint"),
        concave_in_x=rec.get("concave_in_x", False),
    )


def _fan(rec: dict[str, Any]) -> SetMap:
    return FanMap(
        rec["matrices"],
        p_dim=rec.get("p_dim", 1),
        sensitivities=rec.get("sensitivities"),
        lipschitz_p_hint=rec.get("lipschitz_p_hint"),
    )


def _constant(rec: dict[str, Any]) -> SetMap:
    return ConstantMap(body_from_record(rec["set"]), rec.get("p_dim", 1), rec.get("x_dim", 1))


MAP_KINDS: dict[str, Callable[[dict[str, Any]], SetMap]] = {
    "epigraph": _epigraph,
    "fan": _fan,
    "constant": _constant,
    "sqrt_interval": lambda rec: SqrtIntervalMap(rec.get("variable", "p"), rec.get("p_dim", 1), rec.get("x_dim", 1)),
    "halfline_sign": lambda rec: HalflineSignMap(rec.get("variable", "p"), rec.get("p_dim", 1), rec.get("x_dim", 1)),
}


def map_from_record(rec: dict[str, Any]) -> SetMap:
    """Build a set-valued map from its tagged spec-file record."""
    kind = rec.get("kind")
    builder = MAP_KINDS.get(kind)
    if builder is None:
        raise InputError(f"unknown map kind {kind!r}; expected one of {sorted(MAP_KINDS)}")
    try:
        return builder(rec)
    except KeyError as e:
        raise InputError(f"{kind} map record is missing field {e.args[0]!r}") from e


__all__ = [
    "ConstantMap", "CustomMap", "EpigraphMap", "FanMap", "HalflineSignMap", "InclusionInstance",
    "MAP_KINDS", "SampledSolution", "SetMap", "SolutionSlice", "SqrtIntervalMap",
    "concavity_violations", "in_solution", "map_from_record", "phi", "sample_solution",
    "solve_slice_1d",
]
