"""Mean-field Bouchaud-Mezard wealth simulation and rank-dynamics toolkit.

The package simulates ensembles of multiplicatively growing, mean-field
interacting agents to a Pareto-tailed steady state and quantifies how the
wealth ranking reshuffles over time: rank correlations (Kendall, Spearman,
Goodman-Kruskal), top-n overlap decay, autocorrelation and relaxation
times, scaling collapses, and the closed-form stationary analytics
(inverse-gamma law, theoretical Gini). A small ingestion pipeline applies
the same rank statistics to annual rich-list data.
"""

__version__ = "0.1.0"

from wealthdyn.errors import (
    ConfigError,
    DataError,
    FitError,
    SimulationError,
    StatisticsError,
)

__all__ = [
    "__version__",
    "ConfigError",
    "DataError",
    "FitError",
    "SimulationError",
    "StatisticsError",
]
