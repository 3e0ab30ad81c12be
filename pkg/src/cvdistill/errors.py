"""Exception types raised by the simulator."""


class CVDistillError(Exception):
    """Base class for all package errors."""


class TruncationError(CVDistillError):
    """The Fock cutoff is too small for the requested state."""


class LeakageError(CVDistillError):
    """A unitary pushed amplitude outside the truncated box."""


class ZeroProbabilityError(CVDistillError):
    """A heralding event or subtraction has vanishing weight."""


class DisplacementError(CVDistillError):
    """First moments are nonzero where a centred state is required."""


class DimensionError(CVDistillError, ValueError):
    """Operands have incompatible shapes."""


class ConfigError(CVDistillError):
    """Run configuration failed validation."""
