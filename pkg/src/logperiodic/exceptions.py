"""Exception types raised across the package.

All errors derive from :class:`LogPeriodicError`, itself a ``ValueError`` so
that callers used to sklearn-style validation can catch them generically.
"""


class LogPeriodicError(ValueError):
    """Base class for every error raised by this package."""


class InvalidConfig(LogPeriodicError):
    pass


class SingularAtCritical(LogPeriodicError):
    """The power-law term diverges: x = 0 with a non-positive exponent."""


class _LineError(LogPeriodicError):
    def __init__(self, line: int, message: str = ""):
        self.line = line
        super().__init__(f"line {line}: {message}" if message else f"line {line}")


class MalformedRow(_LineError):
    pass


class NonPositivePrice(_LineError):
    pass


class DuplicateDate(_LineError):
    pass


class EmptySeries(LogPeriodicError):
    pass


class InvalidDate(LogPeriodicError):
    pass


class RankDeficient(LogPeriodicError):
    """Basis columns are numerically collinear."""


class SideViolation(LogPeriodicError):
    """Some observation lies on the wrong side of (or at) the critical time."""


class InsufficientData(LogPeriodicError):
    pass


class NoValidGridPoint(LogPeriodicError):
    pass


class ZeroOscillation(LogPeriodicError):
    pass


class InconsistentSpacing(LogPeriodicError):
    pass


class NonPositiveGenerated(LogPeriodicError):
    pass
