"""Exception hierarchy.

Every error raised by the library derives from :class:`StabradError` and
carries a distinct ``exit_code`` used by the command-line front end.
"""


class StabradError(Exception):
    exit_code = 1


class NonConvergence(StabradError):
    exit_code = 10


class DegenerateEigenvalue(StabradError):
    """The rightmost eigenvalue is (numerically) defective, x*y ~ 0."""

    exit_code = 11


class DimensionMismatch(StabradError, ValueError):
    exit_code = 12


class ZeroStructuredPart(StabradError):
    """The projection of the rank-1 perturbation onto the structure vanishes."""

    exit_code = 13


class ZeroStructuredGradient(StabradError):
    exit_code = 14


class NotHurwitz(StabradError):
    exit_code = 15


class ContourEscapesWindow(StabradError):
    exit_code = 16


class OpenContour(StabradError):
    exit_code = 17


class StepSizeUnstable(StabradError):
    exit_code = 18


class ParseError(StabradError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

    exit_code = 19


class UnsupportedField(StabradError):
    exit_code = 20


class SizeGuard(StabradError):
    exit_code = 21
