"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError -> 2, numerical failures
(PhysicalityError, StabilityError, AccuracyError, BalanceError) -> 3,
self-check failures -> 4.
"""


class WigfluxError(Exception):
    """Base class for package errors."""


class ConfigError(WigfluxError):
    """Invalid configuration file or CLI arguments."""


class PhysicalityError(WigfluxError, ValueError):
    """Covariance data violates the uncertainty bound beyond tolerance."""


class GaussianityNotPreserved(WigfluxError):
    """Requested propagation does not keep the state Gaussian."""


class StabilityError(WigfluxError):
    """Explicit time step outside its stability bound, or a blown-up field."""


class AccuracyError(WigfluxError):
    """Quadrature or grid resolution cannot support the requested result."""


class BalanceError(WigfluxError):
    """Entropy balance residual exceeded the method tolerance."""


class UnsupportedOperation(WigfluxError):
    """Operation not defined for the given inputs (e.g. moment degree > 4)."""
