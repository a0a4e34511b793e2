"""Piecewise-linear collocation, marching node by node.

At node ``t_n`` the unknown ``x_n`` enters only the last subinterval
``[t_{n-1}, t_n]`` through the tent expansion, so each step is a scalar root
problem; all earlier cells contribute a fixed history sum.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    check_points,
    check_positive,
    check_positive_int,
    check_problem,
    check_quad,
)
from .exceptions import ConvergenceError, NonFiniteEvaluationError
from .interp import Mesh, PiecewiseLinearFunction

_FD_REL_STEP = 1e-7


class DomainClampWarning(RuntimeWarning):
    """The converged solution needed the domain guard of ``f``."""


def _scalar_solve(F, y0, tol, max_iter, node):
    """Solve ``y = F(y)``: plain fixed point, secant-Newton on non-contraction.

    Returns the root and the number of F evaluations.
    """
    y = y0
    fy = F(y)
    r = fy - y
    prev = abs(r)
    increases = 0
    it = 0
    newton = False
    while abs(r) > tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"collocation equation at node {node} not solved in {max_iter} "
                f"iterations (residual {abs(r):.3e})",
                node=node,
                residual=abs(r),
            )
        it += 1
        if not newton:
            y = fy
        else:
            step = _FD_REL_STEP * max(1.0, abs(y))
            slope = (F(y + step) - (y + step) - r) / step
            y = y - r / slope if slope != 0.0 else fy
        fy = F(y)
        r = fy - y
        if not np.isfinite(r):
            raise NonFiniteEvaluationError(f"non-finite collocation residual at node {node}")
        if abs(r) >= prev:
            increases += 1
            if increases >= 2:
                newton = True
        prev = abs(r)
    return y, it


class LinearCollocation(BaseEstimator):
    """Continuous piecewise-linear collocation on a uniform mesh.

    Parameters
    ----------
    N : int
        Number of subintervals, ``h = 1/N``.
    quad : str or QuadPolicy
        Rule used on every subinterval: ``"trapezoid:k"`` (k panels) or
        ``"gauss:m"``. The default single-panel trapezoid is exact for the
        piecewise-linear integrands of linear problems.
    tol : float
        Absolute tolerance of each scalar collocation equation.
    max_iter : int
        Iteration cap per node.

    Attributes
    ----------
    mesh_ : Mesh
    solution_ : PiecewiseLinearFunction
    n_iter_ : int
        Total scalar iterations over all nodes.
    max_residual_ : float
        Max over nodes of the final collocation residual.
    clamped_ : bool
        Whether ``f`` had to be evaluated at the domain floor at convergence.
    """

    def __init__(self, N=64, quad="trapezoid:1", tol=1e-12, max_iter=100):
        self.N = N
        self.quad = quad
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, problem, mesh=None):
        p = check_problem(problem)
        N = check_positive_int(self.N, "N")
        tol = check_positive(self.tol, "tol")
        max_iter = check_positive_int(self.max_iter, "max_iter")
        policy = check_quad(self.quad)
        mesh = Mesh.uniform(N) if mesh is None else mesh
        N = mesh.N

        us, uw = policy.unit_rule()
        q = us.size
        nodes = mesh.nodes
        x = np.empty(N + 1)
        x[0] = float(p.g(np.float64(0.0)))
        g_nodes = np.asarray(p.g(nodes), dtype=float) * np.ones(N + 1)
        # quadrature data of completed cells, filled as we march
        S = np.empty(N * q)
        W = np.empty(N * q)
        FV = np.empty(N * q)
        residuals = np.zeros(N + 1)
        total_iter = 0
        floor = p.meta.x_domain_min
        clamped = False

        for n in range(1, N + 1):
            tn = nodes[n]
            done = (n - 1) * q
            if done:
                with np.errstate(all="ignore"):
                    hist = float(np.dot(p.G(tn, S[:done]) * W[:done], FV[:done]))
            else:
                hist = 0.0
            lo, width = nodes[n - 1], nodes[n] - nodes[n - 1]
            s_cell = lo + width * us
            w_cell = width * uw * np.asarray(p.G(tn, s_cell), dtype=float)
            left = x[n - 1] * (1.0 - us)
            base = hist + g_nodes[n]

            def F(y, s_cell=s_cell, w_cell=w_cell, left=left, base=base):
                with np.errstate(invalid="ignore"):
                    return base + float(np.dot(w_cell, p.f_guarded(s_cell, left + y * us)))

            y, it = _scalar_solve(F, x[n - 1], tol, max_iter, n)
            total_iter += it
            x[n] = y
            residuals[n] = abs(F(y) - y)
            xs = left + y * us
            if np.any(xs < floor):
                clamped = True
            S[done : done + q] = s_cell
            W[done : done + q] = width * uw
            with np.errstate(invalid="ignore"):
                FV[done : done + q] = p.f_guarded(s_cell, xs)
            if not np.all(np.isfinite(FV[done : done + q])):
                raise NonFiniteEvaluationError(f"f is not finite on cell {n - 1}", where=lo)

        if clamped:
            warnings.warn(
                f"problem {p.name!r}: the converged approximation dips below "
                f"x_domain_min={floor}; f was evaluated at the floor",
                DomainClampWarning,
                stacklevel=2,
            )
        self.mesh_ = mesh
        self.solution_ = PiecewiseLinearFunction(mesh, x)
        self.n_iter_ = total_iter
        self.node_residuals_ = residuals
        self.max_residual_ = float(residuals.max())
        self.clamped_ = clamped
        self.problem_ = p
        return self

    def predict(self, t):
        check_is_fitted(self, "solution_")
        return self.solution_(check_points(t))

    @property
    def values_(self):
        check_is_fitted(self, "solution_")
        return self.solution_.values

    def residual(self, problem=None, solution=None):
        """Per-node collocation residuals of ``solution`` (default: the fit)."""
        check_is_fitted(self, "solution_")
        p = self.problem_ if problem is None else check_problem(problem)
        xh = self.solution_ if solution is None else solution
        return residual(p, xh, self.quad)


def residual(p, xh, quad="trapezoid:1"):
    """``x_h(t_n) - int_0^{t_n} G f(x_h) - g(t_n)`` at every mesh node.

    The integral uses ``quad`` on each mesh cell, evaluating ``x_h``
    directly (no marching), so it is an independent check on a solve.
    """
    p = check_problem(p)
    policy = check_quad(quad)
    us, uw = policy.unit_rule()
    nodes = xh.mesh.nodes
    lo = nodes[:-1, None]
    width = np.diff(nodes)[:, None]
    S = (lo + width * us[None, :]).ravel()
    W = (width * uw[None, :]).ravel()
    with np.errstate(invalid="ignore"):
        FV = p.f_guarded(S, xh(np.clip(S, 0.0, 1.0)))
    q = us.size
    out = np.empty(nodes.size)
    g = np.asarray(p.g(nodes), dtype=float) * np.ones(nodes.size)
    out[0] = xh.values[0] - g[0]
    for n in range(1, nodes.size):
        k = n * q
        out[n] = xh.values[n] - float(np.dot(p.G(nodes[n], S[:k]) * W[:k], FV[:k])) - g[n]
    return out


def solve_linear(problem, N=64, quad="trapezoid:1", tol=1e-12, max_iter=100):
    """Functional shortcut: fit :class:`LinearCollocation` and return the approximation."""
    est = LinearCollocation(N=N, quad=quad, tol=tol, max_iter=max_iter).fit(problem)
    return est.solution_
