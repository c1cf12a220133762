"""Exception hierarchy.

Every error raised on bad data or out-of-domain parameters derives from
:class:`EdgeworthError`; the CLI maps those to exit status 2.
"""


class EdgeworthError(ValueError):
    """Base class for data and domain errors."""


class DomainError(EdgeworthError):
    pass


class UnsupportedOrderError(EdgeworthError):
    pass


class InsufficientSampleError(EdgeworthError):
    pass


class ZeroVarianceError(EdgeworthError):
    pass


class InvalidMarginError(EdgeworthError):
    pass


class UndefinedRelativeError(EdgeworthError):
    """Relative error requested where the loss is not positive."""


class UnsupportedFamilyError(EdgeworthError):
    pass


class NonConvergenceError(EdgeworthError):
    """Adaptive quadrature hit its depth limit.

    ``best_estimate`` holds the value accumulated so far.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
