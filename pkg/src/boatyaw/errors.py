"""Exception types shared across the package."""

from __future__ import annotations


class BoatYawError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(BoatYawError):
    """Invalid or unknown configuration content."""


class SchemaError(BoatYawError):
    """A stream record violates its schema.

    Carries the 1-based line number (and optionally the file path) so CLI
    diagnostics can point at the offending record.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class DegenerateDistributionError(BoatYawError, ValueError):
    """All-zero probability vector; no distribution can be formed."""


class UndefinedMeanError(BoatYawError, ValueError):
    """Circular mean undefined (near-zero resultant, e.g. antipodal mass)."""


class GridMismatchError(BoatYawError, ValueError):
    """Distributions from differently sized grids were combined."""


class HorizonError(BoatYawError, ValueError):
    """Back-projected pixel ray does not intersect the water plane."""


class ShortHistoryError(BoatYawError, ValueError):
    """Trajectory window holds fewer points than required."""


class StationaryError(BoatYawError, ValueError):
    """Trajectory displacement too small for a defined heading."""
