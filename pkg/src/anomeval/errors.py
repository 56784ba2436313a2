"""Exception hierarchy shared by all anomeval modules.

The CLI maps these onto exit codes: degenerate data errors exit with 1,
everything else here (plus I/O errors) exits with 2.
"""

from __future__ import annotations


class AnomevalError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AnomevalError):
    """Invalid parameter value (window sizes, quantile levels, empty lists)."""


class ParseError(AnomevalError):
    """Malformed input file content."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class OrderError(AnomevalError):
    """Timestamps in a series file are not strictly increasing."""


class AlignmentError(AnomevalError):
    """Two sequences that must share a time grid do not."""


class MatrixSideError(AnomevalError):
    """A measure was requested from the wrong kind of confusion matrix."""


class DegenerateDataError(AnomevalError):
    """No events or no predictions, so a simulated statistic is trivially 0."""


class DomainError(AnomevalError):
    """Numeric argument outside the mathematical domain of a function."""
