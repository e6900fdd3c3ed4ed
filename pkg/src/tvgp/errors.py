"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operand dimensions are incompatible."""


class DomainError(ValueError):
    """A parameter lies outside its admissible domain."""


class FactorizationError(ValueError):
    """Cholesky factorization failed even after jitter.

    ``pivot`` is the 1-based index of the first non-positive pivot.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class NumericalError(ArithmeticError):
    """A computation produced a non-finite value.

    ``term`` names the offending piece of the computation.
    """

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class ParseError(ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path
