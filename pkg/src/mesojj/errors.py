"""Exception hierarchy shared by all mesojj modules."""


class MesoJJError(Exception):
    """Base class for every error raised by the package."""


class InvalidMatrix(MesoJJError, ValueError):
    pass


class InvalidFunction(MesoJJError, ValueError):
    pass


class SingularSystem(MesoJJError, ArithmeticError):
    pass


class DegenerateStationaryState(SingularSystem):
    """The evolution generator has more than one stationary state."""


class ToleranceNotMet(MesoJJError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions.

    The best available estimate is kept on the exception so callers can
    decide whether it is good enough.
    """

    def __init__(self, message, value=None, err_estimate=None):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate


class TruncationError(MesoJJError, ArithmeticError):
    pass


class SingleWellError(MesoJJError, ValueError):
    pass


class ZeroResponse(MesoJJError, ArithmeticError):
    pass


class ZeroNoise(MesoJJError, ArithmeticError):
    pass


class ConfigError(MesoJJError, ValueError):
    pass
