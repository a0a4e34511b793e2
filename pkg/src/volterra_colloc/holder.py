"""Moduli of continuity and integral Hoelder seminorms of sampled functions.

All quantities are computed from samples on a uniform grid. The discrete
modulus is a lower bound of the true one, so any inequality checked against
these numbers needs a sampling tolerance.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, UnsupportedParameterError
from .quadrature import gauss_rule

_PANEL_GAUSS_POINTS = 5


@dataclass(eq=False)
class SampledFunction:
    """Values of a function on the uniform grid ``a + k (b - a) / M``, k = 0..M."""

    values: np.ndarray
    a: float = 0.0
    b: float = 1.0
    _lag_max: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise DomainError("need at least two samples (M >= 1)")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sampled values must be finite")
        if not self.b > self.a:
            raise DomainError(f"need a < b, got [{self.a}, {self.b}]")
        self.values.setflags(write=False)

    @classmethod
    def from_callable(cls, func, M, a=0.0, b=1.0):
        grid = np.linspace(a, b, M + 1)
        return cls(np.asarray(func(grid), dtype=float), a, b)

    @property
    def M(self):
        return self.values.size - 1

    @property
    def length(self):
        return self.b - self.a

    @property
    def spacing(self):
        return self.length / self.M

    @property
    def grid(self):
        return np.linspace(self.a, self.b, self.M + 1)

    def _omega_by_lag(self, lag):
        """Cumulative max of |x_{i+d} - x_i| over d <= lag, cached lazily."""
        lag = min(int(lag), self.M)
        have = -1 if self._lag_max is None else self._lag_max.size - 1
        if lag > have:
            x = self.values
            fresh = np.empty(lag - have)
            for j, d in enumerate(range(have + 1, lag + 1)):
                fresh[j] = 0.0 if d == 0 else np.max(np.abs(x[d:] - x[:-d]))
            table = fresh if self._lag_max is None else np.concatenate([self._lag_max, fresh])
            self._lag_max = np.maximum.accumulate(table)
        return self._lag_max[: lag + 1]


@dataclass(frozen=True)
class HolderParams:
    """Exponents of the space J_{alpha,beta}; ``beta = math.inf`` selects the Hoelder limit."""

    alpha: float
    beta: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta >= self.alpha:
            raise DomainError(f"beta must be >= alpha, got beta={self.beta}")

    @property
    def finite(self):
        return math.isfinite(self.beta)


def modulus(x, sigma):
    """Discrete modulus of continuity: max |x_i - x_j| over |t_i - t_j| <= sigma.

    ``sigma`` may be an array.
    """
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig <= 0):
        raise DomainError("sigma must be positive")
    # tiny relative slack so that sigma equal to a grid distance counts that lag
    lags = np.floor(sig / x.spacing * (1.0 + 1e-12)).astype(np.int64)
    lags = np.minimum(lags, x.M)
    table = x._omega_by_lag(int(lags.max()))
    out = table[lags]
    return float(out) if out.ndim == 0 else out


def _dyadic_panel_integral(integrand, top, panels):
    """Sum of 5-point Gauss integrals over [top 2^{-k-1}, top 2^{-k}], k < panels.

    Returns the per-panel contributions, largest sigma first.
    """
    ref = gauss_rule(_PANEL_GAUSS_POINTS, 0.0, 1.0)
    k = np.arange(panels)
    lo = top * 2.0 ** (-k - 1)
    width = lo  # panel [lo, 2 lo]
    sig = lo[:, None] + width[:, None] * ref.nodes[None, :]
    vals = integrand(sig)
    return (vals * ref.weights[None, :]).sum(axis=1) * width


def _panel_count(x, s):
    return max(1, math.ceil(math.log2(s / x.spacing) - 1e-12))


def j_seminorm(x, p, s=None):
    """Approximate ``int_0^s sigma^{-(beta+1)} omega(x, sigma)^{beta/alpha} dsigma``.

    The integral is split into dyadic panels anchored at ``s`` and truncated
    at the grid spacing, below which the sampled modulus carries no
    information.
    """
    if not p.finite:
        raise UnsupportedParameterError("j_seminorm needs finite beta; use j_sup for beta = inf")
    s = x.length if s is None else float(s)
    if not 0.0 < s <= x.length * (1 + 1e-12):
        raise DomainError(f"s must lie in (0, {x.length}], got {s}")
    ratio = p.beta / p.alpha

    def integrand(sig):
        return sig ** (-(p.beta + 1.0)) * modulus(x, sig) ** ratio

    return float(_dyadic_panel_integral(integrand, s, _panel_count(x, s)).sum())


def j_sup(x, alpha, s=None):
    """Max of ``sigma^{-alpha} omega(x, sigma)`` over dyadic ``sigma = s 2^{-k}``."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    s = x.length if s is None else float(s)
    if not 0.0 < s <= x.length * (1 + 1e-12):
        raise DomainError(f"s must lie in (0, {x.length}], got {s}")
    k = np.arange(_panel_count(x, s) + 1)
    sig = s * 2.0 ** (-k)
    return float(np.max(sig ** (-alpha) * modulus(x, sig)))


def norm_alpha_beta(x, p):
    """``|x(a)| + j_{alpha,beta}(x)^{alpha/beta}``."""
    return abs(float(x.values[0])) + j_seminorm(x, p) ** (p.alpha / p.beta)


def sup_bound_constant(p):
    """Prefactor of the sup-norm bound in terms of the integral seminorm.

    For ``beta = inf`` this is ``1 / (2^alpha - 1)``. For ``beta = alpha`` the
    Hoelder-conjugate exponent degenerates and the limiting value of the
    finite-beta expression is returned.
    """
    a, b = p.alpha, p.beta
    if not p.finite:
        return 1.0 / (2.0**a - 1.0)
    # log form: 2^b overflows for large finite beta
    head = math.exp((a / b) * (math.log(b) - b * math.log(2.0) - math.log1p(-(2.0**-b))))
    if b == a:
        # exponent b/(b/a - 1) -> inf, so the second factor -> 1
        return head
    tail = (1.0 - 2.0 ** (-b / (b / a - 1.0))) ** (-(b - a) / b)
    return head * tail


def sup_norm_bound(x, p, T=None):
    """Upper bound on ``max |x|`` from the integral norm of ``x`` on an interval of length T."""
    T = x.length if T is None else float(T)
    if p.finite:
        return sup_bound_constant(p) * T**p.alpha * norm_alpha_beta(x, p)
    return T**p.alpha / (2.0**p.alpha - 1.0) * j_sup(x, p.alpha)
