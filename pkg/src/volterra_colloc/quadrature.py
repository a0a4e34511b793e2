"""Gauss-Legendre rules, Legendre polynomials and composite trapezoid sums."""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import DomainError, NonFiniteEvaluationError, QuadratureFailure

_NEWTON_MAXITER = 100
_NEWTON_TOL = 1e-15


def legendre_eval(n, t):
    """Value and derivative of the degree-``n`` Legendre polynomial.

    Uses the three-term recurrence
    ``(k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}`` and the derivative relation
    ``P_n' = n (t P_n - P_{n-1}) / (t^2 - 1)`` away from ``t = +-1``.
    Works elementwise if ``t`` is an array.
    """
    if n < 0:
        raise DomainError(f"degree must be non-negative, got {n}")
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if n == 0:
        return _unwrap(p_prev), _unwrap(np.zeros_like(t))
    p = t.copy()
    dp_prev = np.zeros_like(t)
    dp = np.ones_like(t)
    for k in range(1, n):
        p_next = ((2 * k + 1) * t * p - k * p_prev) / (k + 1)
        # P'_{k+1} = P'_{k-1} + (2k+1) P_k, stable at the endpoints too
        dp_next = dp_prev + (2 * k + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return _unwrap(p), _unwrap(dp)


def _unwrap(a):
    return float(a) if a.ndim == 0 else a


@lru_cache(maxsize=256)
def _reference_rule(m):
    """Nodes and weights on [-1, 1], ascending."""
    i = np.arange(m)
    # Chebyshev-type initial guesses; these are descending in i
    x = np.cos(np.pi * (4 * i + 3) / (4 * m + 2))
    for _ in range(_NEWTON_MAXITER):
        p, dp = legendre_eval(m, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= _NEWTON_TOL:
            break
    else:
        raise QuadratureFailure(
            f"Legendre root iteration for m={m} did not converge in "
            f"{_NEWTON_MAXITER} steps (last step {np.max(np.abs(dx)):.3e})"
        )
    _, dp = legendre_eval(m, x)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """A fixed quadrature rule on ``[a, b]``.

    An empty rule (no nodes) represents the zero functional of a degenerate
    interval.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple = field(default=(0.0, 1.0))

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise DomainError("nodes and weights differ in length")

    def __len__(self):
        return len(self.nodes)

    def integrate(self, h):
        return integrate(self, h)


def gauss_rule(m, a=0.0, b=1.0):
    """m-point Gauss-Legendre rule on ``[a, b]``, exact to degree ``2m - 1``.

    Returns an empty rule when ``a == b``.
    """
    if m < 1:
        raise DomainError(f"number of points must be >= 1, got {m}")
    a = float(a)
    b = float(b)
    if b < a:
        raise DomainError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return QuadratureRule(np.empty(0), np.empty(0), (a, b))
    x, w = _reference_rule(int(m))
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (x + 1.0), half * w, (a, b))


def integrate(rule, h):
    """Apply ``rule`` to ``h``; ``h`` is called once on the node array."""
    if len(rule) == 0:
        return 0.0
    vals = np.broadcast_to(np.asarray(h(rule.nodes), dtype=float), rule.nodes.shape)
    _check_finite(vals, rule.nodes)
    return float(np.dot(rule.weights, vals))


def trapezoid(a, b, h, panels=1):
    """Composite trapezoid rule with ``panels`` uniform panels."""
    if panels < 1:
        raise DomainError(f"panels must be >= 1, got {panels}")
    if b < a:
        raise DomainError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    t = np.linspace(a, b, panels + 1)
    vals = np.broadcast_to(np.asarray(h(t), dtype=float), t.shape)
    _check_finite(vals, t)
    step = (b - a) / panels
    return float(step * (0.5 * vals[0] + vals[1:-1].sum() + 0.5 * vals[-1]))


def _check_finite(vals, where):
    bad = ~np.isfinite(vals)
    if bad.any():
        node = float(np.asarray(where)[bad][0])
        raise NonFiniteEvaluationError(f"integrand is not finite at t={node!r}", where=node)
