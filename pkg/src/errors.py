"""
Error Types
===========
Exception hierarchy shared by the algebra, decision and engine layers.

The CLI maps these onto exit codes (see main.py).
"""

from typing import Any, Optional


class KboundError(Exception):
    """Base class for every error raised by kbound."""


class UsageError(KboundError, ValueError):
    """A caller broke an operation's precondition."""


class DegenerateProjectionError(KboundError):
    """powerfree found no factor depending on the kept variables."""


class ProjectionCollapseError(KboundError):
    """
    A projection step produced nothing usable.

    Carries the partial trace so callers can report how far projection got.
    """

    def __init__(self, message: str, trace: Optional[Any] = None):
        super().__init__(message)
        self.trace = trace


class ProblemParseError(KboundError, ValueError):
    """Syntax or semantic error in a problem file, with a 1-based position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ResourceLimitError(KboundError):
    """The configured time limit ran out."""
