"""Volterra problems, the integral operator T, benchmark registry and the
existence-condition checker.

A problem is ``x(t) = int_0^t G(t, s) f(s, x(s)) ds + g(t)`` on [0, 1]. All
callables must accept numpy arrays and broadcast.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    NonFiniteEvaluationError,
    UnsupportedParameterError,
)
from .quadrature import gauss_rule


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


# ---------------------------------------------------------------------------
# quadrature policy


@dataclass(frozen=True)
class QuadPolicy:
    """How to integrate over an interval ``[a, b]``.

    kind : ``"gauss"`` (``order`` points) or ``"trapezoid"`` (``order`` panels).
    graded : number of extra dyadic panels refining toward ``a``; each panel
        gets its own rule. Useful when the integrand is rough at the left end.
    """

    kind: str = "gauss"
    order: int = 20
    graded: int = 0

    def __post_init__(self):
        if self.kind not in ("gauss", "trapezoid"):
            raise ConfigurationError(f"unknown quadrature kind {self.kind!r}")
        if self.order < 1 or self.graded < 0:
            raise ConfigurationError("quadrature order must be >= 1 and graded >= 0")

    @classmethod
    def parse(cls, text):
        """Parse ``"gauss:m"``, ``"trapezoid:k"`` or ``"gauss:m:graded"``."""
        parts = str(text).split(":")
        try:
            kind = parts[0]
            order = int(parts[1]) if len(parts) > 1 else (20 if kind == "gauss" else 1)
            graded = int(parts[2]) if len(parts) > 2 else 0
        except ValueError:
            raise ConfigurationError(f"bad quadrature spec {text!r}") from None
        return cls(kind, order, graded)

    def __str__(self):
        tail = f":{self.graded}" if self.graded else ""
        return f"{self.kind}:{self.order}{tail}"

    def unit_rule(self):
        """Nodes and weights on [0, 1] (cached per policy)."""
        return _unit_rule(self)


_UNIT_CACHE = {}


def _unit_rule(policy):
    hit = _UNIT_CACHE.get(policy)
    if hit is not None:
        return hit
    if policy.kind == "gauss":
        r = gauss_rule(policy.order, 0.0, 1.0)
        base_s, base_w = r.nodes, r.weights
    else:
        k = policy.order
        base_s = np.linspace(0.0, 1.0, k + 1)
        base_w = np.full(k + 1, 1.0 / k)
        base_w[0] = base_w[-1] = 0.5 / k
    if policy.graded:
        # panels [0, 2^-G], [2^-G, 2^-G+1], ..., [1/2, 1]
        edges = np.concatenate([[0.0], 2.0 ** -np.arange(policy.graded, -1, -1)])
        s = np.concatenate([lo + (hi - lo) * base_s for lo, hi in zip(edges[:-1], edges[1:])])
        w = np.concatenate([(hi - lo) * base_w for lo, hi in zip(edges[:-1], edges[1:])])
    else:
        s, w = base_s.copy(), base_w.copy()
    s.setflags(write=False)
    w.setflags(write=False)
    _UNIT_CACHE[policy] = (s, w)
    return s, w


DEFAULT_QUAD = QuadPolicy("gauss", 20)


# ---------------------------------------------------------------------------
# problem data


@dataclass(frozen=True)
class RegularityMeta:
    """Constants of the kernel/nonlinearity hypotheses used by the existence check.

    ``rho`` bounds the modulus of continuity of ``G(., s)`` and ``phi`` the one
    of ``f(s, .)``; ``K_G`` bounds ``||G(., s)||_rho`` and ``M_f`` bounds
    ``|f(s, 0)|``.
    """

    M_G: float = 0.0
    K_G: float = 0.0
    M_f: float = 0.0
    rho: Callable = field(default=lambda t: np.asarray(t, dtype=float))
    phi: Callable = field(default=lambda t: np.asarray(t, dtype=float))
    L: Optional[float] = None
    x_domain_min: float = -math.inf

    def __post_init__(self):
        for name in ("M_G", "K_G", "M_f"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        probe = np.linspace(0.0, 1.0, 33)
        for name in ("rho", "phi"):
            v = np.asarray(getattr(self, name)(probe), dtype=float) * np.ones_like(probe)
            if abs(v[0]) > 1e-14 or np.any(np.diff(v) < -1e-14):
                raise DomainError(f"{name} must vanish at 0 and be nondecreasing")


@dataclass(frozen=True)
class Problem:
    """A second-kind Volterra equation on [0, 1]."""

    G: Callable
    f: Callable
    g: Callable = _zero
    exact: Optional[Callable] = None
    meta: RegularityMeta = field(default_factory=RegularityMeta)
    name: str = "custom"

    def f_guarded(self, s, x):
        """``f`` evaluated at ``max(x, x_domain_min)``."""
        lo = self.meta.x_domain_min
        if lo > -math.inf:
            x = np.maximum(x, lo)
        return self.f(s, x)

    def with_forcing(self, g):
        return dataclasses.replace(self, g=g)


def _as_func(x):
    if callable(x):
        return x
    raise TypeError("x must be callable")


def _check(vals, where):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        loc = float(np.broadcast_to(where, np.shape(vals))[bad].ravel()[0])
        raise NonFiniteEvaluationError(f"non-finite integrand at s={loc!r}", where=loc)


def integral_part(p, x, t, quad=DEFAULT_QUAD):
    """``int_0^t G(t, s) f(s, x(s)) ds`` for each entry of ``t`` (no forcing)."""
    x = _as_func(x)
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise DomainError("t must lie in [0, 1]")
    us, uw = quad.unit_rule()
    tt = t.reshape(-1, 1)
    S = tt * us[None, :]
    W = tt * uw[None, :]
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        vals = p.G(tt, S) * p.f_guarded(S, x(S))
    vals = np.where(W == 0.0, 0.0, vals)
    _check(vals, S)
    out = (vals * W).sum(axis=1).reshape(t.shape)
    return float(out) if out.ndim == 0 else out


def apply_T(p, x, t, quad=DEFAULT_QUAD):
    """``(T x)(t) + g(t)`` with the integral approximated by ``quad`` on ``[0, t]``."""
    out = integral_part(p, x, t, quad) + np.asarray(p.g(np.asarray(t, dtype=float)), dtype=float)
    return float(out) if np.ndim(out) == 0 else out


class ManufacturedForcing:
    """``g(t) = exact(t) - int_0^t G f(exact)`` evaluated on demand."""

    def __init__(self, problem, quad):
        self.problem = problem
        self.quad = quad

    def __call__(self, t):
        p = self.problem
        t = np.asarray(t, dtype=float)
        return p.exact(t) - integral_part(p, p.exact, t, self.quad)

    def __repr__(self):
        return f"ManufacturedForcing({self.problem.name!r}, quad={self.quad})"


def manufacture_g(p, quad=DEFAULT_QUAD):
    """Copy of ``p`` whose forcing makes ``p.exact`` a solution (up to quadrature error)."""
    if p.exact is None:
        raise ConfigurationError(f"problem {p.name!r} has no exact solution")
    return p.with_forcing(ManufacturedForcing(p, quad))


# ---------------------------------------------------------------------------
# registry


def _ident(t):
    return np.asarray(t, dtype=float)


def _sqrt_pos(x):
    return np.sqrt(np.maximum(x, 0.0))


def _capillary():
    meta = RegularityMeta(
        M_G=1.0,
        K_G=1.0,
        M_f=1.0,
        rho=_ident,
        phi=lambda r: np.sqrt(2.0 * np.asarray(r, dtype=float)),
        L=None,
        x_domain_min=0.0,
    )
    return Problem(
        G=lambda t, s: 1.0 - np.exp(-(t - s)),
        f=lambda s, x: 1.0 - np.sqrt(2.0 * x),
        meta=meta,
        name="capillary",
    )


def _cusp_exact(t):
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.maximum(0.5 - np.abs(t - 0.5), 0.0))


def _cusp_forcing(t):
    t = np.asarray(t, dtype=float)
    left = np.sqrt(np.maximum(t, 0.0)) - (t + 0.8 * np.maximum(t, 0.0) ** 1.25)
    r = np.maximum(1.0 - t, 0.0)
    right = np.sqrt(r) - (t + 1.6 * 0.5**1.25 - 0.8 * r**1.25)
    return np.where(t <= 0.5, left, right)


def _holder_cusp():
    meta = RegularityMeta(
        M_G=1.0, K_G=1.0, M_f=1.0, rho=_ident, phi=_sqrt_pos, L=None, x_domain_min=0.0
    )
    return Problem(
        G=lambda t, s: np.ones(np.broadcast_shapes(np.shape(t), np.shape(s))),
        f=lambda s, x: 1.0 + np.sqrt(x),
        g=_cusp_forcing,
        exact=_cusp_exact,
        meta=meta,
        name="holder-cusp",
    )


def _log_exact(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = 1.0 / (1.0 - np.log(t))
    return np.where(t > 0.0, out, 0.0)


# the exact solution has an unbounded derivative at 0: grade the panels there
LOG_FORCING_QUAD = QuadPolicy("gauss", 20, graded=48)


def _log():
    meta = RegularityMeta(M_G=1.0, K_G=2.0, M_f=2.0, rho=_ident, phi=_ident, L=1.0)
    base = Problem(
        G=lambda t, s: t - s,
        f=lambda s, x: 1.0 + np.exp(-x),
        exact=_log_exact,
        meta=meta,
        name="log",
    )
    return manufacture_g(base, LOG_FORCING_QUAD)


def _smooth_exp():
    meta = RegularityMeta(
        M_G=math.e, K_G=1.0 + math.e, M_f=1.0, rho=_ident, phi=_ident, L=1.0
    )
    return Problem(
        G=lambda t, s: np.exp(t - s),
        f=lambda s, x: 1.0 + x,
        exact=lambda t: 0.5 * (np.exp(2.0 * np.asarray(t, dtype=float)) - 1.0),
        meta=meta,
        name="smooth-exp",
    )


_REGISTRY = {
    "capillary": _capillary,
    "holder-cusp": _holder_cusp,
    "log": _log,
    "smooth-exp": _smooth_exp,
}


def available_problems():
    return sorted(_REGISTRY)


def registry(name):
    """Built-in benchmark problem by name."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; available: {', '.join(available_problems())}"
        ) from None
    return factory()


def problem_from_expressions(G, f, g=None, exact=None, x_domain_min=-math.inf, name="custom",
                             quad=DEFAULT_QUAD):
    """Build a problem from expression strings (see :mod:`volterra_colloc.expr`).

    If ``g`` is omitted but ``exact`` is given, the forcing is manufactured.
    """
    from .expr import compile_expr

    prob = Problem(
        G=compile_expr(G, ("t", "s")),
        f=compile_expr(f, ("s", "x")),
        g=compile_expr(g, ("t",)) if g is not None else _zero,
        exact=compile_expr(exact, ("t",)) if exact is not None else None,
        meta=RegularityMeta(x_domain_min=float(x_domain_min)),
        name=name,
    )
    if g is None and exact is not None:
        prob = manufacture_g(prob, quad)
    return prob


# ---------------------------------------------------------------------------
# existence condition

_PANEL_CHUNK = 64
_MAX_PANELS = 1024
_TAIL_RTOL = 1e-17
# panels are wide relative to the variation of sigma^(gamma b/a) for large b/a
_EXISTENCE_GAUSS_POINTS = 10


def existence_integral(meta, p):
    """``int_0^1 sigma^{-(beta+1)} (K_G rho(sigma) + M_G sigma)^{beta/alpha} dsigma``.

    Summed over dyadic panels ``[2^{-k-1}, 2^{-k}]`` with 10-point Gauss until
    the panel contributions fall below ``1e-17`` of the running total.
    Raises :class:`DivergenceError` when they do not.
    """
    if not p.finite:
        raise UnsupportedParameterError("the existence check needs finite beta")
    a, b = p.alpha, p.beta
    ref = gauss_rule(_EXISTENCE_GAUSS_POINTS, 0.0, 1.0)
    total = 0.0
    last = math.inf
    for start in range(0, _MAX_PANELS, _PANEL_CHUNK):
        k = np.arange(start, start + _PANEL_CHUNK)
        lo = 2.0 ** (-k - 1.0)
        sig = lo[:, None] * (1.0 + ref.nodes[None, :])
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            base = meta.K_G * np.asarray(meta.rho(sig), dtype=float) + meta.M_G * sig
            logv = -(b + 1.0) * np.log(sig) + (b / a) * np.log(base)
            vals = np.exp(logv)
        vals = np.where(base == 0.0, 0.0, vals)
        contrib = (vals * ref.weights[None, :]).sum(axis=1) * lo
        if not np.all(np.isfinite(contrib)):
            raise DivergenceError("existence integral overflows: rho is too rough near 0")
        for c in contrib:
            total += c
            last = c
            if total == 0.0 and c == 0.0:
                continue
            if c <= _TAIL_RTOL * total:
                return total
    if total == 0.0:
        return 0.0
    raise DivergenceError(
        f"existence integral did not settle after {_MAX_PANELS} dyadic panels "
        f"(last panel {last:.3e}, running sum {total:.3e})"
    )


def existence_lhs(meta, p, r0, factor=None):
    if factor is None:
        factor = existence_integral(meta, p) ** (p.alpha / p.beta)
    return (float(meta.phi(r0)) + meta.M_f) * factor


def existence_margin(meta, p, r0):
    """``r0`` minus the left-hand side of the invariant-ball condition.

    Positive means T maps the ball of radius ``r0`` in J_{alpha,beta} into itself.
    """
    if not r0 > 0:
        raise DomainError(f"r0 must be positive, got {r0}")
    return r0 - existence_lhs(meta, p, r0)


def find_r0(meta, p, lo=1e-8, hi=1e8, rtol=1e-10):
    """Smallest radius in ``[lo, hi]`` with positive margin, or ``None``.

    Bisection (in log scale) between the last non-positive and first positive
    margin; assumes the margin changes sign once in the bracket.
    """
    factor = existence_integral(meta, p) ** (p.alpha / p.beta)

    def margin(r):
        return r - existence_lhs(meta, p, r, factor)

    if margin(hi) <= 0:
        return None
    if margin(lo) > 0:
        return lo
    while (hi - lo) > rtol * hi:
        mid = math.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
        if margin(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi
