"""Emit report series as CSV for external plotting."""

from __future__ import annotations

import csv
import io
import math
from typing import Any

from ..errors import InputError

SIGNIFICANT_DIGITS = 12


def fmt_cell(value: Any) -> str:
    """Numbers with 12 significant digits; infinities as +inf/-inf."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, (int, float)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        return f"{v:.{SIGNIFICANT_DIGITS}g}"
    if isinstance(value, (list, tuple)):
        return " ".join(fmt_cell(v) for v in value)
    return str(value)


def series_names(report: dict[str, Any]) -> list[str]:
    return sorted(report.get("series", {}))


def emit_csv(report: dict[str, Any], which: str) -> str:
    """Header plus rows of one named series; an empty series gives the header only."""
    series = report.get("series", {})
    if which not in series:
        raise InputError(f"unknown series {which!r}; available: {series_names(report)}")
    data = series[which]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data["columns"])
    for row in data["rows"]:
        writer.writerow([fmt_cell(v) for v in row])
    return buf.getvalue()
