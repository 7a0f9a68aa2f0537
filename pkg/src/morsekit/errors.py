"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class MorsekitError(Exception):
    """Base class for every error raised by morsekit."""


class PresentationSyntaxError(MorsekitError, ValueError):
    """Malformed presentation text; ``position`` is the 0-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SmallCancellationError(MorsekitError, ValueError):
    """A presentation does not satisfy the small cancellation hypothesis."""


class SpecError(MorsekitError, ValueError):
    """Invalid space description."""


class BuildError(MorsekitError, RuntimeError):
    """A space could not be constructed (e.g. vertex budget exceeded)."""


class ConfigError(MorsekitError, ValueError):
    """Invalid suite configuration."""


class BudgetError(MorsekitError, ValueError):
    """Budget or sampling parameters are unusable."""
