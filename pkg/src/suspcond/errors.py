"""Exception hierarchy shared by all modules."""


class SuspCondError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(SuspCondError):
    """Input rejected before any computation started (CLI exit code 2)."""


class ComputationError(SuspCondError):
    """A computation could not be completed (CLI exit code 3)."""


class PackingFailure(ComputationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantError(ValidationError):
    pass


class DivergenceGuard(ValidationError):
    pass


class SingularInput(ComputationError):
    pass


class DomainError(ValidationError):
    pass


class IndexCollision(ComputationError):
    pass


class SeriesFailure(ComputationError):
    pass


class NonSolvable(ComputationError):
    pass


class UnboundSymbol(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass
