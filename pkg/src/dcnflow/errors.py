"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when a contact set or derived object violates a structural rule."""


class TrivialNetworkError(ValidationError):
    """Raised when a contact network is empty where a nonempty one is required."""


class GridError(ValueError):
    """Raised for window grids that are unusable (too short, unordered,
    or colliding with contact times after sanitization)."""


class ParameterError(ValueError):
    """Raised for model parameters outside their admissible ranges."""


class NumericalError(RuntimeError):
    """Raised when a linear solve fails or produces non-stochastic output."""


class PolicyError(ValueError):
    """Raised for unusable verb policies or unknown verbs in strict mode."""


class ParseError(ValueError):
    """Raised for malformed input files; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IntegrityError(RuntimeError):
    """Raised when persisted flow data is inconsistent with its manifest."""


class PreconditionError(ValueError):
    """Raised when an oracle's structural precondition does not hold."""


class OracleError(RuntimeError):
    """Raised when an oracle run cannot produce a trustworthy answer."""
