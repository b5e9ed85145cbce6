"""Refinement-sequence estimates and their convergence verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .config import DEFAULT_TOLERANCES, Tolerances

CONVERGED = "converged"
DIVERGING = "diverging"
INCONCLUSIVE = "inconclusive"

VERDICTS = (CONVERGED, DIVERGING, INCONCLUSIVE)

# Flags carried on estimates
EMPTY_BAND = "empty-band"
LOCAL_MINIMIZER = "local-minimizer"
REGION_RESTRICTED = "region-restricted"
SAMPLED = "sampled"
TRUNCATED = "truncated"


def _close(a: float, b: float, tol: Tolerances) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    if abs(a) <= tol.level_abs and abs(b) <= tol.level_abs:
        return True
    return abs(a - b) <= tol.converged_rel * max(abs(a), abs(b))


def classify(values: Sequence[float], tol: Tolerances = DEFAULT_TOLERANCES, stable_levels: int = 2) -> str:
    """Verdict of a refinement sequence ordered from coarse to fine.

    converged: the last ``stable_levels`` values agree pairwise within the
    relative tolerance (or all sit below the absolute floor).
    diverging: the last value is +inf, or the sequence never decreases,
    grows by at least the divergence factor from first to last and has not
    settled into a converged tail.
    """
    vals = list(values)
    if not vals:
        return INCONCLUSIVE
    if math.isinf(vals[-1]) and vals[-1] > 0:
        return DIVERGING
    if len(vals) >= stable_levels:
        tail = vals[-stable_levels:]
        if all(_close(a, b, tol) for a, b in zip(tail, tail[1:])):
            return CONVERGED
    if all(math.isfinite(v) for v in vals) and len(vals) >= 2:
        growing = all(b >= a for a, b in zip(vals, vals[1:]))
        if growing and vals[0] > tol.level_abs and vals[-1] >= tol.divergence_factor * vals[0]:
            return DIVERGING
    return INCONCLUSIVE


def fmt_value(value: float | None) -> float | str | None:
    """JSON-safe float: infinities become "+inf"/"-inf"."""
    if value is None:
        return None
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return float(value)


def _fmt_scale(scale: Any) -> Any:
    if isinstance(scale, tuple):
        return [fmt_value(s) for s in scale]
    return fmt_value(scale)


@dataclass(frozen=True)
class Estimate:
    """A value obtained as the last level of a refinement sequence, or +inf when it diverges."""
    kind: str
    value: float
    levels: tuple[tuple[Any, float], ...]
    verdict: str
    flags: tuple[str, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def from_levels(
        cls,
        kind: str,
        levels: Sequence[tuple[Any, float]],
        tol: Tolerances = DEFAULT_TOLERANCES,
        stable_levels: int = 2,
        flags: Sequence[str] = (),
        meta: dict[str, Any] | None = None,
    ) -> "Estimate":
        levels = tuple((scale, float(v)) for scale, v in levels)
        values = [v for _, v in levels]
        verdict = classify(values, tol, stable_levels)
        # a diverging sequence estimates +inf; the finite samples stay in levels
        if verdict == DIVERGING:
            value = math.inf
        else:
            value = values[-1] if values else math.nan
        return cls(kind, value, levels, verdict, tuple(flags), dict(meta or {}))

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def usable(self) -> bool:
        """Finite and not flagged as diverging."""
        return self.is_finite and self.verdict != DIVERGING

    def has_flag(self, flag: str) -> bool:
        return flag in self.flags

    def to_record(self) -> dict[str, Any]:
        rec = {
            "kind": self.kind,
            "value": fmt_value(self.value),
            "verdict": self.verdict,
            "levels": [[_fmt_scale(s), fmt_value(v)] for s, v in self.levels],
        }
        if self.flags:
            rec["flags"] = list(self.flags)
        if self.meta:
            rec["meta"] = self.meta
        return rec


class SlopeEstimate(Estimate):
    """Strong, strict outer or partial strict outer slope estimate."""


class ModulusEstimate(Estimate):
    """Empirical Lipschitz-type modulus (labelled empirical in reports)."""


def bound_ratio(num: float, den: float) -> float | None:
    """num / den for nonnegative quantities with c / +inf = 0; None when undefined."""
    if math.isnan(num) or math.isnan(den) or den <= 0:
        return None
    if math.isinf(den):
        return None if math.isinf(num) else 0.0
    return num / den
