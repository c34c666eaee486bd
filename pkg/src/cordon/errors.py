"""Exception types shared across the package."""


class CordonError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(CordonError, ValueError):
    """A generator or experiment was given parameters it cannot satisfy."""


class GenerationFailedError(CordonError):
    """Random generation could not complete, e.g. too few cells for the targets."""


class ContractViolation(CordonError, ValueError):
    """A caller broke a precondition (bad coordinate, unknown target id, ...)."""


class MapFormatError(CordonError, ValueError):
    """A map or placement file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
