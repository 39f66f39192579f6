"""Exception types shared across the toolkit."""


class TwinbeamError(Exception):
    """Base class for all toolkit errors."""


class CapacityError(TwinbeamError):
    """An occupation number does not fit under the Fock cutoff."""


class ValidationError(TwinbeamError):
    """An input value violates a documented precondition."""


class DomainError(TwinbeamError):
    """A model was evaluated outside its mathematical domain (e.g. the u=0 pole)."""


class TruncationError(TwinbeamError):
    """Truncation leakage too large for the requested comparison to be meaningful."""


class TraceParseError(TwinbeamError):
    """A trace file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FitConvergenceError(TwinbeamError):
    """The fit iteration did not converge; carries the last iterate."""

    def __init__(self, message: str, last_params=None, iterations: int | None = None):
        self.last_params = last_params
        self.iterations = iterations
        super().__init__(message)


class TruncationWarning(UserWarning):
    """Truncated-state leakage exceeded the reporting threshold."""
