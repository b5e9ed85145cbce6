"""Write run reports as JSON."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from rich.console import Console

console = Console(stderr=True)


def _clean(value: Any) -> Any:
    """Replace non-finite floats with strings and tuples with lists, recursively."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "+inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        # numpy scalars
        return _clean(value.item())
    return value


def dumps_report(report: dict[str, Any]) -> str:
    """Deterministic JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def export_json(report: dict[str, Any], out_path: Path, quiet: bool = False) -> Path:
    """
    Write the report to out_path, creating parent directories.

    Returns:
        The path written
    """
    if not quiet:
        console.print(f"[dim]Writing report to {out_path}...[/dim]")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(dumps_report(report), encoding="utf-8")
    return out_path
