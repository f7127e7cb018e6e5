"""Exception types shared across the package."""


class MlelmError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(MlelmError, ValueError):
    """Operand dimensions are incompatible with the requested operation."""


class SingularMatrixError(MlelmError, ArithmeticError):
    """A factorization failed: the matrix is singular or numerically
    indistinguishable from singular."""


class CalibrationError(MlelmError, ValueError):
    """Threshold calibration needs at least one positive and one negative
    score cell."""


class ParseError(MlelmError, ValueError):
    """A data file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        location = path or "<input>"
        if line is not None:
            message = f"{location}:{line}: {message}"
        elif path is not None:
            message = f"{location}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class DataFormatError(ParseError):
    """The file parsed but its content violates the expected layout, e.g.
    a label attribute with values outside {0, 1}."""


class ModelFormatError(MlelmError, ValueError):
    """The given bytes are not a valid serialized model."""
