"""Exception types shared across the package."""


class KinplexError(Exception):
    """Base class for all package errors."""


class PreconditionError(KinplexError):
    """An operation was called with arguments outside its contract."""


class DocumentError(KinplexError):
    """A mechanism or plan document failed to parse or validate.

    Carries enough context (field name, line number when known) to point
    at the offending part of the document.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        parts = [message]
        if field is not None:
            parts.append(f"field {field!r}")
        if line is not None:
            parts.append(f"line {line}")
        super().__init__("; ".join(parts))


class AxisUndefinedError(KinplexError):
    """Rotation angle is too small for the axis to be recoverable."""


class GimbalLockError(KinplexError):
    """Euler angles are singular at this orientation (pitch at a pole)."""


class DomainError(KinplexError):
    """A point lies outside the domain of a section or chart."""


class UnsupportedTopologyError(KinplexError):
    """The mechanism graph shape is not handled (e.g. closed loops in FK)."""


class VacuousTestError(KinplexError):
    """A geometric test was asked on too few joints to be meaningful."""


class TrackingLostError(KinplexError):
    """Path lifting diverged; records the parameter time of failure."""

    def __init__(self, time, error):
        self.time = time
        self.error = error
        super().__init__(f"tracking lost at t={time:.6f} (error {error:.6f})")
