"""Exception types shared across the package."""


class GemscopeError(Exception):
    """Base class for all gemscope errors."""


class ConfigError(GemscopeError):
    """Invalid, ambiguous or inconsistent configuration input."""


class UnitParseError(ConfigError):
    """A quantity string could not be parsed or has the wrong dimension."""


class BandwidthExceededError(GemscopeError):
    """Requested frequency falls outside what the memory can store."""


class ExtentError(GemscopeError):
    """Simulation grid does not cover the required region."""


class GridMismatchError(GemscopeError):
    """Two gridded objects live on different grids."""


class DegenerateDistributionError(GemscopeError):
    """Photon sampling was requested from an all-zero intensity profile."""


class FitError(GemscopeError):
    """A nonlinear fit failed to converge or its data window is degenerate."""


class AnalysisError(GemscopeError):
    """Statistical analysis cannot proceed on the given data."""
