"""Exception types raised by the simulator.

Every class carries an ``exit_code`` used by the command line driver so that
each failure mode maps to a distinct process status.
"""


class SKQError(Exception):
    exit_code = 1


class NonDiagonalizable(SKQError):
    """Jacobian of the map is defective at the requested point."""

    exit_code = 10


class DimensionMismatch(SKQError, ValueError):
    exit_code = 11


class NotCyclic(SKQError):
    exit_code = 12


class DegenerateSpectrum(SKQError):
    exit_code = 13


class DegenerateMode(SKQError):
    exit_code = 14


class SingularV(SKQError):
    """The truncated ergodic average V^(N)(theta) is too ill-conditioned to invert."""

    exit_code = 15


class ResonantDenominator(SKQError):
    exit_code = 16


class LogBranchJump(SKQError):
    exit_code = 17


class EmptySupport(SKQError):
    exit_code = 18


class ParseError(SKQError):
    exit_code = 20

    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field


class ValidationError(SKQError, ValueError):
    exit_code = 21

    def __init__(self, field, message=None):
        super().__init__(message or f"invalid value for {field!r}")
        self.field = field
