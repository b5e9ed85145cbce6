"""Exception hierarchy for svistab."""

from __future__ import annotations


class SviError(Exception):
    """Base class for all svistab errors."""


class InputError(SviError, ValueError):
    """Raised when an operation receives arguments it cannot work with."""


class DimensionError(InputError):
    """Raised on dimension mismatches or when the dimension cap is exceeded."""

    def __init__(self, message: str, expected: int | None = None, got: int | None = None):
        super().__init__(message)
        self.expected = expected
        self.got = got

    def __str__(self) -> str:
        base = super().__str__()
        if self.expected is not None and self.got is not None:
            return f"{base} (expected dimension {self.expected}, got {self.got})"
        return base


class ExpressionError(InputError):
    """Raised when an expression string cannot be parsed or evaluated."""

    def __init__(self, message: str, text: str = "", column: int | None = None):
        super().__init__(message)
        self.text = text
        self.column = column

    def __str__(self) -> str:
        base = super().__str__()
        if self.column is None:
            return base
        return f"{base} at column {self.column}: {self.text!r}"


class InstanceError(SviError):
    """Raised when a problem instance fails validation or evaluation."""


class NotApplicableError(SviError):
    """Raised when the preconditions of a bound do not hold."""


class SpecError(SviError):
    """Raised when a spec file fails to parse or validate."""

    def __init__(self, message: str, diagnostics: list[tuple[str, str]] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        lines = [base] + [f"  {loc}: {msg}" for loc, msg in self.diagnostics]
        return "\n".join(lines)
