"""Exception hierarchy shared by all modules."""


class ChernSimError(Exception):
    """Base class for library errors."""


class ArgumentError(ChernSimError, ValueError):
    """Bad argument: wrong shape, index, range or unknown name."""


class ValidationError(ChernSimError, ValueError):
    """Input violates a physical or numerical invariant."""


class DegeneracyError(ChernSimError):
    """Ground state is degenerate within tolerance."""

    def __init__(self, message: str, gap: float = 0.0):
        super().__init__(message)
        self.gap = gap


class DegenerateManifoldError(ValidationError):
    """Ramp radius is zero or negative."""


class UnsupportedError(ChernSimError):
    """Operation not defined for this schedule kind."""


class ResolutionError(ChernSimError):
    """Grid too coarse for a reliable texture integral."""


class GaplessError(ChernSimError):
    """Band gap closes on the momentum grid."""
