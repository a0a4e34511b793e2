"""Legendre-Gauss spectral collocation.

Unknowns are the values at the N+1 Gauss points of [0, 1]. At each node
``t_n`` the integral over ``[0, t_n]`` is replaced by an m-point Gauss rule
whose sub-nodes are reached by barycentric interpolation of the iterate.
The initial condition is not imposed; it holds up to discretisation error
because ``(T x)(0) = g(0)``.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points, check_positive, check_positive_int, check_problem
from .exceptions import ConvergenceError, DomainError, NonFiniteEvaluationError
from .interp import BarycentricPolynomial, barycentric
from .quadrature import gauss_rule

_STALL_SWEEPS = 5
_FD_REL_STEP = 1e-7


@dataclass(frozen=True, eq=False)
class SpectralSolution:
    """Values at the scaled Gauss nodes and the interpolating polynomial."""

    nodes: np.ndarray
    values: np.ndarray
    poly: BarycentricPolynomial

    def __call__(self, t):
        t = check_points(t)
        return self.poly(t)


def discrete_inner(x, y, weights):
    """``sum_n x_n y_n w_n``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not (x.shape == y.shape == w.shape):
        raise DomainError("x, y and weights must have the same length")
    return float(np.sum(x * y * w))


class _Discretisation:
    """Iteration-invariant data of one solve: rules on [0, t_n] and interpolation."""

    def __init__(self, p, N, m):
        rule = gauss_rule(N + 1, 0.0, 1.0)
        self.nodes = rule.nodes
        self.weights = rule.weights
        unit = gauss_rule(m, 0.0, 1.0)
        tn = self.nodes[:, None]
        self.S = tn * unit.nodes[None, :]
        W = tn * unit.weights[None, :]
        self.GW = np.asarray(p.G(tn, self.S), dtype=float) * W
        bw = barycentric(self.nodes, np.zeros_like(self.nodes)).weights
        self.B = BarycentricPolynomial.matrix(self.nodes, bw, self.S.ravel())
        self.bary_weights = bw
        self.g = np.asarray(p.g(self.nodes), dtype=float) * np.ones_like(self.nodes)
        self.p = p

    def sub_values(self, X):
        return (self.B @ X).reshape(self.S.shape)

    def T(self, X):
        with np.errstate(invalid="ignore"):
            fv = self.p.f_guarded(self.S, self.sub_values(X))
        # row-wise sums in a fixed order
        out = np.einsum("ij,ij->i", self.GW, fv) + self.g
        if not np.all(np.isfinite(out)):
            raise NonFiniteEvaluationError("discrete operator produced non-finite values")
        return out

    def jacobian(self, X):
        """``I - dT/dX`` with a finite-difference derivative of f in x."""
        Y = self.sub_values(X)
        step = _FD_REL_STEP * np.maximum(1.0, np.abs(Y))
        with np.errstate(invalid="ignore"):
            fx = (self.p.f_guarded(self.S, Y + step) - self.p.f_guarded(self.S, Y)) / step
        coef = (self.GW * fx).ravel()
        rows = np.repeat(np.arange(X.size), self.S.shape[1])
        dT = np.zeros((X.size, X.size))
        np.add.at(dT, rows, coef[:, None] * self.B)
        return np.eye(X.size) - dT


class SpectralCollocation(BaseEstimator):
    """Single-polynomial collocation at the N+1 Legendre-Gauss points of [0, 1].

    Parameters
    ----------
    N : int
        Polynomial degree.
    quad_order : int or None
        Points of the Gauss rule on each ``[0, t_n]``; ``None`` means ``N + 1``.
    tol : float
        Max-norm tolerance on the nodal residual ``X - T_N X``.
    max_iter : int
        Cap on fixed-point sweeps plus Newton steps.

    Attributes
    ----------
    solution_ : SpectralSolution
    n_iter_ : int
    residual_history_ : list of float
    max_residual_ : float
    method_ : str
        ``"fixed-point"`` or ``"newton"``, whichever finished the solve.
    """

    def __init__(self, N=16, quad_order=None, tol=1e-13, max_iter=200):
        self.N = N
        self.quad_order = quad_order
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, problem):
        p = check_problem(problem)
        N = check_positive_int(self.N, "N")
        m = N + 1 if self.quad_order is None else check_positive_int(self.quad_order, "quad_order")
        tol = check_positive(self.tol, "tol")
        max_iter = check_positive_int(self.max_iter, "max_iter")
        disc = _Discretisation(p, N, m)

        X = disc.g.copy()
        TX = disc.T(X)
        res = float(np.max(np.abs(X - TX)))
        history = [res]
        best = res
        stalled = 0
        newton = False
        it = 0
        while res > tol:
            if it >= max_iter:
                raise ConvergenceError(
                    f"spectral collocation (N={N}) not converged after {max_iter} "
                    f"iterations (residual {res:.3e})",
                    residual=res,
                    history=history,
                )
            it += 1
            if newton:
                X = _damped_newton_step(disc, X, TX, res)
            else:
                X = TX
            TX = disc.T(X)
            res = float(np.max(np.abs(X - TX)))
            history.append(res)
            if not newton:
                if res < 0.5 * best:
                    stalled = 0
                else:
                    stalled += 1
                    if stalled >= _STALL_SWEEPS:
                        newton = True
                best = min(best, res)

        self.solution_ = SpectralSolution(
            disc.nodes, X.copy(), barycentric(disc.nodes, X)
        )
        self.quad_weights_ = disc.weights
        self.n_iter_ = it
        self.residual_history_ = history
        self.max_residual_ = res
        self.method_ = "newton" if newton else "fixed-point"
        self.problem_ = p
        self._disc = disc
        return self

    def predict(self, t):
        check_is_fitted(self, "solution_")
        return self.solution_(t)

    @property
    def nodes_(self):
        check_is_fitted(self, "solution_")
        return self.solution_.nodes

    @property
    def values_(self):
        check_is_fitted(self, "solution_")
        return self.solution_.values

    def residual(self, values=None):
        """Nodal residual ``X - T_N X`` for ``values`` (default: the fit)."""
        check_is_fitted(self, "solution_")
        X = self.solution_.values if values is None else np.asarray(values, dtype=float)
        return X - self._disc.T(X)


def _damped_newton_step(disc, X, TX, res):
    R = X - TX
    dx = np.linalg.solve(disc.jacobian(X), -R)
    lam = 1.0
    for _ in range(30):
        Xn = X + lam * dx
        try:
            rn = float(np.max(np.abs(Xn - disc.T(Xn))))
        except NonFiniteEvaluationError:
            rn = np.inf
        if rn < res:
            return Xn
        lam *= 0.5
    return X + lam * dx


def solve_spectral(problem, N=16, quad_order=None, tol=1e-13, max_iter=200):
    """Functional shortcut returning the :class:`SpectralSolution`."""
    est = SpectralCollocation(N=N, quad_order=quad_order, tol=tol, max_iter=max_iter)
    return est.fit(problem).solution_
