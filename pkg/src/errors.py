# src/errors.py

"""
Exception hierarchy shared by the solver modules and the CLI.
"""

from typing import Optional


class PinnError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(PinnError):
    """Misuse of a computation graph or a network shape."""


class ArgumentError(PinnError, ValueError):
    """An argument is outside the domain an operation accepts."""


class NumericalError(PinnError):
    """A numerical procedure broke down or cannot reach the requested accuracy."""


class ConfigError(PinnError):
    """Run configuration failed schema validation."""


class ParseError(PinnError):
    """A data file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
