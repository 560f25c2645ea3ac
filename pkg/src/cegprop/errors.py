class CegError(Exception):
    """Base class for engine errors."""


class ValidationError(CegError):
    """A model or file violates a structural invariant."""


class InvalidPathError(CegError):
    """An edge sequence is not a root-to-leaf (or root-to-sink) path."""


class MalformedGraphError(ValidationError):
    """The graph is not a DAG with a single root and sink."""


class ObservationError(CegError):
    """An observation references edges that do not belong where it says."""


class IncompatibleObservationError(ObservationError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ZeroProbabilityError(CegError):
    """Conditioning on an event of prior probability zero."""


class InstanceTooLargeError(CegError):
    """Brute-force enumeration would exceed the configured path cap."""
