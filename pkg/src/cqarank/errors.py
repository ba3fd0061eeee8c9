class CqaError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(CqaError, ValueError):
    pass


class ParseError(ValidationError):
    """Malformed input file. Carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationError(CqaError):
    pass


class TrainingError(CqaError, RuntimeError):
    pass


class ConvergenceError(TrainingError):
    """SMO hit its iteration cap before reaching the stopping tolerance."""

    def __init__(self, message, violation):
        self.violation = violation
        super().__init__(f"{message} (residual violation {violation:.3g})")
