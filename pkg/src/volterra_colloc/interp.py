"""Piecewise-linear (tent basis) and barycentric Lagrange interpolation."""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .holder import j_seminorm, j_sup, sup_bound_constant


@dataclass(frozen=True, eq=False)
class Mesh:
    """Strictly increasing nodes from 0 to 1."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("a mesh needs at least two nodes")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise DomainError("mesh endpoints must be exactly 0 and 1")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, N):
        if N < 1:
            raise DomainError(f"need N >= 1 subintervals, got {N}")
        nodes = np.arange(N + 1) / N
        nodes[-1] = 1.0
        return cls(nodes)

    @property
    def N(self):
        return self.nodes.size - 1

    @property
    def uniform_flag(self):
        steps = np.diff(self.nodes)
        return bool(np.allclose(steps, 1.0 / self.N, rtol=1e-12, atol=0))

    @property
    def h(self):
        """Spacing for uniform meshes, else the largest cell width."""
        return 1.0 / self.N if self.uniform_flag else float(np.max(np.diff(self.nodes)))

    def locate(self, t):
        """Cell index n with t in [t_n, t_{n+1}] (right endpoint goes to the last cell)."""
        idx = np.searchsorted(self.nodes, t, side="right") - 1
        return np.clip(idx, 0, self.N - 1)


def _check_unit(t):
    t = np.asarray(t, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)) or not np.all(np.isfinite(t)):
        raise DomainError("evaluation points must lie in [0, 1]")
    return t


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFunction:
    """Continuous piecewise-linear function given by its node values."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.mesh.nodes.shape:
            raise DomainError(
                f"expected {self.mesh.nodes.size} node values, got {values.size}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        t = _check_unit(t)
        nodes, vals = self.mesh.nodes, self.values
        n = self.mesh.locate(t)
        t0, t1 = nodes[n], nodes[n + 1]
        lam = (t - t0) / (t1 - t0)
        out = vals[n] * (1.0 - lam) + vals[n + 1] * lam
        # stored value at nodes, exactly
        out = np.where(t == t1, vals[n + 1], np.where(t == t0, vals[n], out))
        return float(out) if out.ndim == 0 else out


def interp_linear(mesh, values):
    """Piecewise-linear interpolant ``I_h`` through ``values`` at the mesh nodes.

    ``values`` may also be a callable, which is then sampled at the nodes.
    """
    if callable(values):
        values = values(mesh.nodes)
    return PiecewiseLinearFunction(mesh, values)


def tent(n, mesh, t):
    """Hat function of node ``n``: 1 at ``t_n``, 0 at every other node."""
    if not 0 <= n <= mesh.N:
        raise DomainError(f"node index {n} outside 0..{mesh.N}")
    t = _check_unit(t)
    nodes = mesh.nodes
    out = np.zeros_like(t)
    if n > 0:
        left = (t >= nodes[n - 1]) & (t <= nodes[n])
        out = np.where(left, (t - nodes[n - 1]) / (nodes[n] - nodes[n - 1]), out)
    if n < mesh.N:
        right = (t >= nodes[n]) & (t <= nodes[n + 1])
        out = np.where(right, (nodes[n + 1] - t) / (nodes[n + 1] - nodes[n]), out)
    return float(out) if out.ndim == 0 else out


def interp_error_bound(x, p, h):
    """Upper bound on ``||x - I_h x||_inf`` for mesh width ``h``.

    ``x`` is a :class:`~volterra_colloc.holder.SampledFunction` on [0, 1].
    The inner integral over ``[0, h]`` reuses the dyadic panels of
    :func:`~volterra_colloc.holder.j_seminorm`.
    """
    if not 0.0 < h <= 1.0:
        raise DomainError(f"h must lie in (0, 1], got {h}")
    if p.finite:
        inner = j_seminorm(x, p, s=h)
        return sup_bound_constant(p) * h**p.alpha * inner ** (p.alpha / p.beta)
    return h**p.alpha / (2.0**p.alpha - 1.0) * j_sup(x, p.alpha, s=h)


def barycentric_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    span = nodes.max() - nodes.min() if nodes.size > 1 else 1.0
    # scale differences by 4/span to keep the products in range
    diff = (nodes[:, None] - nodes[None, :]) * (4.0 / span)
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    return w / np.max(np.abs(w))


@dataclass(frozen=True, eq=False)
class BarycentricPolynomial:
    """Interpolating polynomial through (nodes, values), second barycentric form."""

    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.matrix(self.nodes, self.weights, t.ravel()) @ self.values
        out = out.reshape(t.shape)
        return float(out) if out.ndim == 0 else out

    @staticmethod
    def matrix(nodes, weights, targets):
        """Matrix mapping node values to values at ``targets``.

        Rows for targets that coincide with a node are exact unit vectors.
        """
        targets = np.asarray(targets, dtype=float)
        diff = targets[:, None] - nodes[None, :]
        hit = diff == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = weights[None, :] / diff
        rows = hit.any(axis=1)
        c[rows] = hit[rows].astype(float)
        return c / c.sum(axis=1, keepdims=True)


def barycentric(nodes, values):
    """Build the degree ``len(nodes) - 1`` interpolant through distinct nodes."""
    nodes = np.array(nodes, dtype=float).ravel()
    values = np.array(values, dtype=float).ravel()
    if nodes.size != values.size or nodes.size == 0:
        raise DomainError("need equally many nodes and values (at least one)")
    if np.unique(nodes).size != nodes.size:
        raise DomainError("interpolation nodes must be distinct")
    weights = barycentric_weights(nodes)
    for a in (nodes, values, weights):
        a.setflags(write=False)
    return BarycentricPolynomial(nodes, values, weights)


def observed_interp_error(func, mesh, probe=None):
    """Max of |func - I_h func| over a probe grid (default 64 points per cell)."""
    if probe is None:
        probe = 64 * mesh.N + 1
    t = np.linspace(0.0, 1.0, probe)
    pl = interp_linear(mesh, func)
    return float(np.max(np.abs(func(t) - pl(t))))


__all__ = [
    "Mesh",
    "PiecewiseLinearFunction",
    "BarycentricPolynomial",
    "interp_linear",
    "tent",
    "interp_error_bound",
    "barycentric",
    "barycentric_weights",
    "observed_interp_error",
]
