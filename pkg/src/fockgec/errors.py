"""Exception types shared across the package."""


class FockgecError(Exception):
    """Base class for package errors."""


class CapacityError(FockgecError):
    """Requested object exceeds the desk-scale capacity cap."""


class DegenerateWidthError(FockgecError):
    """Centered Hamiltonian has zero spectral width; GEC undefined."""


class EigendecompositionError(FockgecError):
    """Eigensolver failed to converge."""


class CrossingError(FockgecError):
    """Curve difference has no, or more than one, sign change."""


class ConfigError(FockgecError):
    """Invalid experiment configuration."""


class BudgetExceededError(FockgecError):
    """Wall-clock budget exhausted before the run completed."""
