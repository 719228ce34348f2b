"""Exception types shared by all modules."""

from __future__ import annotations


class PocmedError(Exception):
    """Base class for input and precondition errors."""


class ParseError(PocmedError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PocmedError):
    """A structure failed its axioms; carries the report."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class LimitExceeded(PocmedError):
    pass


class PreconditionError(PocmedError):
    pass


class InternalError(AssertionError):
    """A theorem-backed check failed. This signals a bug, not bad input."""
