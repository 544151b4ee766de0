"""Exception types shared across the package."""


class CutbenchError(Exception):
    """Base class for all package errors."""


class InvalidWidthError(CutbenchError, ValueError):
    """Circuit width outside the generator's valid range."""


class RequiresSamplingError(CutbenchError, ValueError):
    """Exact simulation requested for a circuit containing measurements."""


class InvalidArgumentError(CutbenchError, ValueError):
    """Bad argument value (e.g. zero shots)."""


class BasisMismatchError(CutbenchError, ValueError):
    """Observable term is not diagonal in the measured basis."""


class DimensionError(CutbenchError, ValueError):
    """Mismatched lengths between paired inputs."""


class NoDecompositionError(CutbenchError, ValueError):
    """No QPD basis is known for the requested gate kind."""


class WidthViolationError(CutbenchError, ValueError):
    """A subcircuit exceeds the configured width limit."""


class InvalidPlanError(CutbenchError, ValueError):
    """A cut plan does not disconnect the circuit as required."""


class EmptyComparisonError(CutbenchError, ValueError):
    """No matched run pairs available for a baseline comparison."""


class ConfigError(CutbenchError, ValueError):
    """Malformed configuration file or CLI arguments."""
