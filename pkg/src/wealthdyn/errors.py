"""Exception hierarchy shared across the package.

The CLI maps these to exit codes: ConfigError/DataError -> 1,
SimulationError/StatisticsError/FitError -> 2, OSError -> 3.
"""


class WealthdynError(Exception):
    """Base class for package errors."""


class ConfigError(WealthdynError, ValueError):
    """Invalid or inconsistent simulation/experiment configuration."""


class DataError(WealthdynError, ValueError):
    """Malformed or contract-violating input data (CSV records, rankings)."""


class SimulationError(WealthdynError, RuntimeError):
    """Numeric failure during evolution (overflow, non-finite wealth)."""


class StatisticsError(WealthdynError, RuntimeError):
    """An estimator cannot produce a value (too short, degenerate, ties)."""


class FitError(WealthdynError, RuntimeError):
    """Nonlinear or linear fit could not be initialized or converged."""
