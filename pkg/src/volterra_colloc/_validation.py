"""Input validation helpers shared by the estimators."""

import numbers

import numpy as np

from .exceptions import ConfigurationError, DomainError
from .problem import Problem, QuadPolicy, registry


def check_problem(problem):
    """Accept a :class:`Problem` or a registry name."""
    if isinstance(problem, str):
        return registry(problem)
    if not isinstance(problem, Problem):
        raise TypeError(f"expected a Problem or a registry name, got {type(problem).__name__}")
    return problem


def check_quad(quad):
    if isinstance(quad, QuadPolicy):
        return quad
    return QuadPolicy.parse(quad)


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < minimum:
        raise ConfigurationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not value > 0:
        raise ConfigurationError(f"{name} must be positive, got {value!r}")
    return float(value)


def check_points(t):
    """1-d float array of evaluation points in [0, 1]; keeps scalars scalar."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any((arr < 0.0) | (arr > 1.0)):
        raise DomainError("evaluation points must lie in [0, 1]")
    return arr
