"""Output formats for run reports."""

from .csv_series import emit_csv, series_names
from .json_report import dumps_report, export_json

__all__ = ["dumps_report", "emit_csv", "export_json", "series_names"]
