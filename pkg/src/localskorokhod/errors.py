"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "PathFormatError",
    "ConfigError",
    "InvariantViolation",
    "NotRelativelyCompactError",
]


class PathFormatError(ValueError):
    """Malformed path data, with the offending position in the message."""


class ConfigError(ValueError):
    """Invalid configuration or generator specification."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed. This indicates a bug."""


class NotRelativelyCompactError(ValueError):
    """A path family whose modulus curves do not vanish on the search grid."""
