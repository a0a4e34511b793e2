"""Collocation solvers for nonlinear Volterra integral equations on [0, 1]
and integral-Hoelder-space diagnostics."""

__version__ = "0.1.0"

from .exceptions import (
    ConfigurationError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    NonFiniteEvaluationError,
    QuadratureFailure,
    UnsupportedParameterError,
)
from .holder import (
    HolderParams,
    SampledFunction,
    j_seminorm,
    j_sup,
    modulus,
    norm_alpha_beta,
    sup_bound_constant,
    sup_norm_bound,
)
from .interp import (
    BarycentricPolynomial,
    Mesh,
    PiecewiseLinearFunction,
    barycentric,
    interp_error_bound,
    interp_linear,
    tent,
)
from .linear import LinearCollocation, residual, solve_linear
from .problem import (
    Problem,
    QuadPolicy,
    RegularityMeta,
    apply_T,
    available_problems,
    existence_margin,
    find_r0,
    manufacture_g,
    registry,
)
from .quadrature import QuadratureRule, gauss_rule, integrate, legendre_eval, trapezoid
from .spectral import SpectralCollocation, SpectralSolution, discrete_inner, solve_spectral

__all__ = [name for name in dir() if not name.startswith("_")]
