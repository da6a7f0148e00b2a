"""Exception types shared across the package."""


class ZetaLadderError(Exception):
    """Base class for all package errors."""


class DomainError(ZetaLadderError, ValueError):
    """An argument lies outside the admissible domain of an operation."""


class ConvergenceError(ZetaLadderError):
    """An iterative solver failed to reach its tolerance.

    Carries the last iterate and bracket so callers can diagnose.
    """

    def __init__(self, message, last=None, bracket=None):
        super().__init__(message)
        self.last = last
        self.bracket = bracket


class BelowThresholdError(ZetaLadderError):
    """The ladder equation has no admissible root for the given data."""


class CacheExhaustedError(ZetaLadderError):
    """A cumulative-integral lookup fell beyond the cached range.

    `required_tmax` names the extension that would make the call succeed.
    """

    def __init__(self, message, required_tmax=None):
        super().__init__(message)
        self.required_tmax = required_tmax


class StorageError(ZetaLadderError):
    """A cache file could not be read, written, or parsed."""


class CacheFormatError(StorageError):
    """A cache file exists but its header, rows, or checksum are invalid."""


class SingularPointError(ZetaLadderError, ValueError):
    """Pointwise evaluation was requested at a non-removable singularity."""


class ConsistencyError(ZetaLadderError):
    """Internally computed quantities disagree beyond tolerance."""


class AccuracyError(ZetaLadderError):
    """Adaptive integration could not meet the tolerance within budget.

    Carries the best available result.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EvaluationError(ZetaLadderError):
    """An integrand returned a non-finite value.

    Carries the offending abscissa.
    """

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa
