"""Exception types shared by the simulator modules and the CLI."""


class QfsError(Exception):
    """Base class for all simulator errors."""


class ValidationError(QfsError, ValueError):
    """Raised when an input violates a structural requirement.

    Examples are non-unitary gates, channels that are not trace preserving,
    weights that do not sum to one, or operators whose dimension does not
    match the subsystems they act on.
    """


class DimensionLimitError(QfsError):
    """Raised when a register or operator exceeds the configured dimension cap."""
