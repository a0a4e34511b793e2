import warnings

import numpy as np
import pytest
from sklearn.base import clone

from volterra_colloc.exceptions import ConfigurationError, ConvergenceError, DomainError
from volterra_colloc.interp import Mesh, interp_linear
from volterra_colloc.linear import DomainClampWarning, LinearCollocation, residual, solve_linear
from volterra_colloc.problem import Problem, registry

# the cusp approximation undershoots at t = 1; tests that care assert the warning explicitly
pytestmark = pytest.mark.filterwarnings("ignore::volterra_colloc.linear.DomainClampWarning")

ONE = Problem(G=lambda t, s: np.ones_like(s), f=lambda s, x: np.ones_like(x))
ZERO = Problem(G=lambda t, s: np.ones_like(s), f=lambda s, x: np.zeros_like(x))


def node_error(name, N, **kw):
    p = registry(name)
    est = LinearCollocation(N=N, **kw).fit(p)
    return np.max(np.abs(est.values_ - p.exact(est.mesh_.nodes)))


@pytest.mark.parametrize("N", [1, 3, 16, 100])
def test_constant_integrand(N):
    xh = solve_linear(ONE, N=N)
    assert np.max(np.abs(xh.values - xh.mesh.nodes)) <= 1e-14


def test_smooth_exp_second_order():
    e = [node_error("smooth-exp", N) for N in (128, 256, 512)]
    assert e[2] < e[1] < e[0]
    assert 3 <= e[0] / e[1] <= 5 and 3 <= e[1] / e[2] <= 5


def test_smooth_exp_probe_error_second_order():
    p = registry("smooth-exp")
    t = np.linspace(0, 1, 10 * 256 + 1)
    errs = []
    for N in (64, 128, 256):
        xh = solve_linear(p, N=N)
        errs.append(np.max(np.abs(xh(t) - p.exact(t))))
    assert 3 <= errs[0] / errs[1] <= 5 and 3 <= errs[1] / errs[2] <= 5


@pytest.mark.parametrize("name", ["holder-cusp", "log"])
def test_rough_problems_decrease(name):
    e = [node_error(name, 2**k) for k in range(4, 10)]
    assert all(b < a for a, b in zip(e, e[1:]))


@pytest.mark.parametrize("name", ["smooth-exp", "holder-cusp", "log", "capillary"])
def test_residual_certificate(name):
    est = LinearCollocation(N=64).fit(name)
    assert est.max_residual_ <= est.tol
    assert np.max(np.abs(est.residual())) <= 1e-11


def test_residual_independent_of_marching():
    p = registry("smooth-exp")
    xh = solve_linear(p, N=32)
    assert np.max(np.abs(residual(p, xh))) <= 1e-11


def test_residual_detects_perturbation():
    p = registry("smooth-exp")
    xh = solve_linear(p, N=32)
    vals = xh.values.copy()
    vals[17] += 1e-3
    r = residual(p, interp_linear(xh.mesh, vals))
    assert abs(r[17]) >= 1e-4


def test_zero_problem():
    est = LinearCollocation(N=20).fit(ZERO)
    assert np.all(est.values_ == 0.0)
    assert np.all(est.residual() == 0.0)


def test_determinism():
    a = LinearCollocation(N=200).fit("log").values_
    b = LinearCollocation(N=200).fit("log").values_
    assert np.array_equal(a, b)


def test_self_interpolation():
    est = LinearCollocation(N=37).fit("holder-cusp")
    t = np.random.default_rng(0).uniform(0, 1, 1000)
    again = interp_linear(est.mesh_, est.values_)
    assert np.max(np.abs(est.predict(t) - again(t))) <= 1e-15


def test_newton_fallback():
    # last-cell coefficient of the unknown is -10 h: fixed point diverges for N = 2
    p = Problem(G=lambda t, s: np.ones_like(s), f=lambda s, x: -20.0 * x,
                g=lambda t: np.ones_like(np.asarray(t, float)))
    est = LinearCollocation(N=2).fit(p)
    assert est.max_residual_ <= 1e-12
    # closed form of the trapezoid recursion x_n = (1 - 5 x_{n-1}) / 6 ... from x_0 = 1
    x1 = (1 - 0.5 * 20 * 0.5 * 1) / (1 + 0.5 * 20 * 0.5)
    assert est.values_[1] == pytest.approx(x1, abs=1e-12)


def test_convergence_error_carries_node():
    p = Problem(G=lambda t, s: np.ones_like(s), f=lambda s, x: 4.0 * np.cos(x) + 40.0 * x)
    with pytest.raises(ConvergenceError) as info:
        LinearCollocation(N=1, max_iter=3).fit(p)
    assert info.value.node == 1


def test_gauss_policy_matches_trapezoid_on_linear_problem():
    p = registry("smooth-exp")
    a = LinearCollocation(N=64, quad="gauss:4").fit(p).values_
    b = LinearCollocation(N=64).fit(p).values_
    assert np.max(np.abs(a - b)) <= 1e-3


def test_nonuniform_mesh():
    mesh = Mesh(np.sort(np.concatenate([[0, 1], np.random.default_rng(3).uniform(0, 1, 30)])))
    est = LinearCollocation().fit(ONE, mesh=mesh)
    assert np.max(np.abs(est.values_ - mesh.nodes)) <= 1e-14


def test_clamp_warning():
    # the true solution x = -t leaves the admissible half-line
    p = Problem(G=lambda t, s: np.ones_like(s), f=lambda s, x: -1.0 + 0 * x)
    p = p.__class__(G=p.G, f=p.f, meta=registry("capillary").meta)
    with pytest.warns(DomainClampWarning):
        est = LinearCollocation(N=4).fit(p)
    assert est.clamped_


def test_cusp_dip_at_right_end_shrinks():
    # exact solution is 0 at t = 1 with infinite slope; only the last node undershoots
    dips = []
    for N in (64, 256, 1024):
        with pytest.warns(DomainClampWarning):
            v = LinearCollocation(N=N).fit("holder-cusp").values_
        assert v[0] == 0.0 and np.all(v[1:-1] > 0)
        dips.append(-v[-1])
    assert dips[0] > dips[1] > dips[2] > 0


def test_no_clamp_warning_for_interior_solution():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DomainClampWarning)
        assert not LinearCollocation(N=64).fit("capillary").clamped_


def test_sklearn_api():
    est = LinearCollocation(N=10, quad="gauss:3")
    assert est.get_params() == {"N": 10, "quad": "gauss:3", "tol": 1e-12, "max_iter": 100}
    c = clone(est).set_params(N=5)
    assert c.N == 5 and est.N == 10
    assert c.fit("smooth-exp").values_.shape == (6,)


def test_validation():
    for bad in (dict(N=0), dict(N=2.5), dict(tol=0.0), dict(quad="simpson:2")):
        with pytest.raises(ConfigurationError):
            LinearCollocation(**bad).fit("smooth-exp")
    with pytest.raises(DomainError):
        LinearCollocation(N=4).fit("smooth-exp").predict(1.2)
