"""Exception types raised by the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedParameterError(ValueError):
    """A parameter value is valid in general but not for this operation."""


class NonFiniteEvaluationError(FloatingPointError):
    """A user callable returned NaN or inf.

    Attributes
    ----------
    where : float or None
        The abscissa at which the offending value was produced.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class QuadratureFailure(RuntimeError):
    """Internal failure while building a quadrature rule (a bug, not user error)."""


class ConvergenceError(RuntimeError):
    """A nonlinear iteration did not reach its tolerance.

    Attributes
    ----------
    node : int or None
        Collocation node index where the iteration stalled (marching solvers).
    residual : float
        Last residual norm.
    history : list of float
        Residual norms per iteration, when recorded.
    """

    def __init__(self, message, node=None, residual=float("nan"), history=None):
        super().__init__(message)
        self.node = node
        self.residual = residual
        self.history = list(history or [])


class DivergenceError(ArithmeticError):
    """A dyadic panel sum of a singular integral failed to settle."""


class ConfigurationError(ValueError):
    """Invalid experiment configuration."""
