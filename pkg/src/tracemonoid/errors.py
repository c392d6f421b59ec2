"""Exception hierarchy shared by all modules."""


class TraceMonoidError(Exception):
    """Base class for every error raised by this package."""


class InputError(TraceMonoidError):
    """Malformed or invalid user input (CLI exit status 2)."""


class DomainError(TraceMonoidError):
    """Well-formed input on which the requested construction does not exist
    (CLI exit status 1)."""


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(InputError):
    pass


class CombinatorialBlowup(DomainError):
    pass


class CapExceeded(DomainError):
    pass


class NotAPrefix(DomainError):
    pass


class Reducible(DomainError):
    pass


class EmptyTrace(DomainError):
    pass


class NoRootInUnitInterval(DomainError):
    pass


class DegenerateCoefficient(DomainError):
    pass


class NonPositiveSolution(DomainError):
    pass


class NotMobius(DomainError):
    pass


class NotAdmissible(DomainError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class ZeroNormalization(DomainError):
    pass


class SolveFailure(DomainError):
    pass
