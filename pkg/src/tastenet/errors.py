"""Exception hierarchy used across the toolkit.

The CLI maps these onto exit codes, so anything user-facing should raise
one of the subclasses rather than a bare ValueError.
"""


class TasteNetError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TasteNetError):
    """Invalid parameters, thresholds, or run configuration."""


class DataError(TasteNetError):
    """Malformed or inconsistent input data."""
