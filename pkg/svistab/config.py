"""Tolerances and default schedules."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import SpecError

# Environment variable naming a JSON file with a tolerance override block
TOL_OVERRIDE_ENV = "SVI_TOL_OVERRIDE"

# Desk-scale cap on ambient dimensions
MAX_DIM = 4

# Default schedules
DEFAULT_R_SCHEDULE = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
DEFAULT_EPS_SCHEDULE = (1e-1, 3e-2, 1e-2, 3e-3)
DEFAULT_DELTA_SCHEDULE = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4)
DEFAULT_DIRS_N = 64
DEFAULT_GRID_N = 41
DEFAULT_SEED = 0


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by all estimators."""
    membership: float = 1e-9   # set membership and zero tests
    root: float = 1e-8         # bisection width for slice endpoints
    slope: float = 1e-7        # local-minimizer detection
    value: float = 1e-8        # bounded-search width in value_at
    slack: float = 0.10        # relative slack for bound-vs-empirical checks
    converged_rel: float = 0.05
    level_abs: float = 1e-6    # levels below this are treated as equal
    divergence_factor: float = 10.0
    positivity: float = 1e-3   # slopes at or below this count as zero

    def merged(self, overrides: Mapping[str, Any] | None) -> "Tolerances":
        """Return a copy with the given fields replaced."""
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise SpecError(
                "Unknown tolerance fields",
                diagnostics=[(f"tolerances.{name}", "unknown field") for name in unknown],
            )
        return replace(self, **{k: float(v) for k, v in overrides.items()})

    def to_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()


def load_env_override(environ: Mapping[str, str] | None = None) -> dict[str, Any]:
    """Read the tolerance block named by SVI_TOL_OVERRIDE, if set."""
    environ = os.environ if environ is None else environ
    path = environ.get(TOL_OVERRIDE_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SpecError(f"Cannot read tolerance override {path}: {e}") from e
    if not isinstance(data, dict):
        raise SpecError(f"Tolerance override {path} must be a JSON object")
    # Accept either a bare block or {"tolerances": {...}}
    return data.get("tolerances", data)


def resolve_tolerances(
    spec_block: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> Tolerances:
    """Defaults < spec-file block < environment override file."""
    tol = DEFAULT_TOLERANCES.merged(spec_block)
    return tol.merged(load_env_override(environ))
