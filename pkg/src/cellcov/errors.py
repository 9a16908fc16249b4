"""Error hierarchy mapped to CLI exit codes."""


class CellcovError(Exception):
    """Base class for toolkit errors."""


class ConfigError(CellcovError):
    """Invalid configuration or incompatible option combination (exit 2)."""


class DataError(CellcovError):
    """Missing or malformed input data (exit 3)."""


class NumericError(CellcovError):
    """Numerical failure: domain violations, non-finite results (exit 4)."""
