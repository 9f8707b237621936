"""Exception types raised by gaussqfim."""


class GaussQfimError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(GaussQfimError, ValueError):
    """An argument is outside its domain or has inconsistent dimensions."""


class SingularCovarianceError(GaussQfimError, ValueError):
    """The covariance matrix is not invertible."""


class SingularQfimError(GaussQfimError, ValueError):
    """A Fisher information matrix is singular.

    ``directions`` holds the (approximate) null vectors in parameter space,
    one per row, and ``parameters`` the parameter names when known.
    """

    def __init__(self, message, directions=None, parameters=None):
        super().__init__(message)
        self.directions = directions
        self.parameters = parameters


class NumericalConsistencyError(GaussQfimError, ArithmeticError):
    """A quantity that must be real/Hermitian came out with a large residue."""


class UnsupportedDerivativeError(GaussQfimError, NotImplementedError):
    """Analytic derivatives are not available for this model."""


class SpecError(GaussQfimError, ValueError):
    """A model or sweep specification could not be parsed.

    ``path`` is a JSON-path-like location such as ``channel[0].param``.
    """

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path
