"""Exception hierarchy shared across the engine.

The CLI maps these onto process exit codes, so the split between data,
configuration, estimation and feasibility problems is part of the contract.
"""


class DataError(Exception):
    """Bad or unusable input data (unreadable file, duplicate dates, NaNs...)."""


class SchemaError(DataError):
    """Input file is structurally wrong (missing column, no header)."""


class AlignmentError(DataError):
    """Two series that must share an index do not."""


class EstimationError(Exception):
    """A model could not be estimated (rank deficiency, degenerate sample)."""


class ConfigError(Exception):
    """Invalid configuration value or flag combination."""


class TailTooSmallError(ConfigError):
    """Requested tail holds too few Monte Carlo paths to estimate anything."""
