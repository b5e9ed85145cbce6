"""svistab - Stability analysis for parameterized set-valued inclusions."""

__version__ = "0.1.0"
