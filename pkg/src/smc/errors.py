"""Exception types shared across the package."""


class SmcError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SmcError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionMismatch(SmcError, ValueError):
    pass


class NegativeValuation(ParseError):
    pass


class InvalidMatching(SmcError, ValueError):
    pass


class EpsilonOutOfRange(SmcError, ValueError):
    pass


class CapExceeded(SmcError):
    """An enumeration would exceed its configured size cap."""


class NotDoublyStochastic(SmcError, ValueError):
    pass


class NotBinary(SmcError, ValueError):
    pass


class Not2P2N(SmcError, ValueError):
    pass


class AssignmentDoesNotSatisfy(SmcError, ValueError):
    pass


class ParameterError(SmcError, ValueError):
    pass
