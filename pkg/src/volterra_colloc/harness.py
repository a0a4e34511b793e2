"""Convergence studies, existence reports and interpolation-bound tables."""

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from .exceptions import ConfigurationError, DivergenceError
from .holder import HolderParams, SampledFunction
from .interp import Mesh, interp_error_bound, observed_interp_error
from .linear import DomainClampWarning, LinearCollocation
from .problem import (
    RegularityMeta,
    existence_integral,
    existence_margin,
    find_r0,
    problem_from_expressions,
    registry,
)
from .quadrature import gauss_rule
from .spectral import SpectralCollocation

CSV_HEADER = ("method", "problem", "N", "h_or_degree", "err_sup", "err_l2", "iters", "seconds")
_L2_GAUSS = 64
_SPECTRAL_PROBE = 200


@dataclass
class ExperimentConfig:
    """One convergence study (or a single solve when ``resolutions`` has one entry).

    ``problem`` is a registry name or a dict of expression strings with keys
    ``G``, ``f`` and optionally ``g``, ``exact``, ``x_domain_min``.
    ``error_at`` selects where the sup error is measured: ``"nodes"`` (the
    collocation nodes) or ``"probe"`` (a uniform probe grid, plus the nodes
    for the spectral method). ``None`` picks nodes for the linear method and
    the probe grid for the spectral one.
    """

    problem: object = "smooth-exp"
    method: str = "linear"
    resolutions: tuple = (16, 32, 64)
    quad: str = "trapezoid:1"
    quad_order: Optional[int] = None
    tol: Optional[float] = None
    probe: Optional[int] = None
    error_at: Optional[str] = None
    jobs: int = 1
    timing: bool = False
    out: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if self.method not in ("linear", "spectral"):
            raise ConfigurationError(f"method must be 'linear' or 'spectral', got {self.method!r}")
        res = tuple(int(n) for n in self.resolutions)
        if not res or any(n < 1 for n in res) or any(b <= a for a, b in zip(res, res[1:])):
            raise ConfigurationError(f"resolutions must be strictly increasing and >= 1, got {res}")
        self.resolutions = res
        if self.error_at not in (None, "nodes", "probe"):
            raise ConfigurationError(f"error_at must be 'nodes' or 'probe', got {self.error_at!r}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"format must be 'csv' or 'json', got {self.format!r}")

    @property
    def problem_name(self):
        if isinstance(self.problem, str):
            return self.problem
        return self.problem.get("name", "custom")

    def build_problem(self):
        if isinstance(self.problem, str):
            return registry(self.problem)
        spec = dict(self.problem)
        if "G" not in spec or "f" not in spec:
            raise ConfigurationError("inline problems need at least 'G' and 'f' expressions")
        return problem_from_expressions(
            spec["G"],
            spec["f"],
            g=spec.get("g"),
            exact=spec.get("exact"),
            x_domain_min=spec.get("x_domain_min", -math.inf),
            name=spec.get("name", "custom"),
        )

    def estimator(self, N):
        if self.method == "linear":
            kw = {} if self.tol is None else {"tol": self.tol}
            return LinearCollocation(N=N, quad=self.quad, **kw)
        kw = {} if self.tol is None else {"tol": self.tol}
        return SpectralCollocation(N=N, quad_order=self.quad_order, **kw)


@dataclass
class ReportRow:
    method: str
    problem: str
    N: int
    h_or_degree: float
    err_sup: Optional[float]
    err_l2: Optional[float]
    iters: Optional[int]
    seconds: Optional[float]
    status: str = "ok"
    max_residual: Optional[float] = None
    message: str = ""

    def csv_fields(self):
        return [
            self.method,
            self.problem,
            str(self.N),
            _fmt(self.h_or_degree),
            _fmt(self.err_sup),
            _fmt(self.err_l2),
            "" if self.iters is None else str(self.iters),
            _fmt(self.seconds),
        ]


def _fmt(v):
    if v is None:
        return ""
    return format(float(v), ".17g")


@dataclass
class ConvergenceReport:
    rows: list
    method: str
    problem: str
    observed_order: Optional[float] = None
    decay_factors: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(r.status == "ok" for r in self.rows)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def to_json(self):
        doc = {
            "version": __version__,
            "created": datetime.now(timezone.utc).isoformat(),
            "config": self.config,
            "method": self.method,
            "problem": self.problem,
            "observed_order": self.observed_order,
            "decay_factors": self.decay_factors,
            "rows": [asdict(r) for r in self.rows],
        }
        return json.dumps(doc, indent=2, allow_nan=True)


def parse_csv(text):
    """Rows of an emitted CSV as dicts of typed values (inverse of ``to_csv``)."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ConfigurationError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for rec in reader:
        out.append(
            {
                "method": rec["method"],
                "problem": rec["problem"],
                "N": int(rec["N"]),
                "h_or_degree": _parse_float(rec["h_or_degree"]),
                "err_sup": _parse_float(rec["err_sup"]),
                "err_l2": _parse_float(rec["err_l2"]),
                "iters": int(rec["iters"]) if rec["iters"] else None,
                "seconds": _parse_float(rec["seconds"]),
            }
        )
    return out


def _parse_float(s):
    return float(s) if s != "" else None


def observed_order(h, err):
    """Least-squares slope of log(err) against log(h) over the finest half of the data.

    At least three points are used; returns ``None`` with fewer than three
    usable (positive, finite) errors.
    """
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    keep = np.isfinite(err) & (err > 0)
    h, err = h[keep], err[keep]
    if h.size < 3:
        return None
    order = np.argsort(-h)  # coarse to fine
    h, err = h[order], err[order]
    take = max(3, math.ceil(h.size / 2))
    slope, _ = np.polyfit(np.log(h[-take:]), np.log(err[-take:]), 1)
    return float(slope)


def _probe_grid(method, N, nodes, probe):
    if method == "linear":
        k = 10 * N + 1 if probe is None else probe
        return np.linspace(0.0, 1.0, k)
    k = _SPECTRAL_PROBE if probe is None else probe
    return np.union1d(np.linspace(0.0, 1.0, k), nodes)


def _l2_error(approx, exact, probe):
    ref = gauss_rule(_L2_GAUSS, 0.0, 1.0)
    lo = probe[:-1, None]
    width = np.diff(probe)[:, None]
    s = lo + width * ref.nodes[None, :]
    diff = approx(s.ravel()) - exact(s.ravel())
    return float(math.sqrt(np.sum((diff.reshape(s.shape) ** 2) * (width * ref.weights[None, :]))))


def _solve_one(cfg, problem, N):
    est = cfg.estimator(N)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainClampWarning)
        try:
            est.fit(problem)
        except Exception as exc:  # noqa: BLE001 - reported per row
            return est, time.perf_counter() - start, exc
    return est, time.perf_counter() - start, None


def _measure(cfg, problem, est):
    if cfg.method == "linear":
        nodes = est.mesh_.nodes
    else:
        nodes = est.nodes_
    probe = _probe_grid(cfg.method, est.N, nodes, cfg.probe)
    error_at = cfg.error_at or ("nodes" if cfg.method == "linear" else "probe")
    if error_at == "nodes":
        err_sup = float(np.max(np.abs(est.values_ - problem.exact(nodes))))
    else:
        pts = probe if cfg.method == "spectral" else np.union1d(probe, nodes)
        err_sup = float(np.max(np.abs(est.predict(pts) - problem.exact(pts))))
    err_l2 = _l2_error(est.predict, problem.exact, probe)
    return err_sup, err_l2


def run_convergence(cfg, require_exact=True):
    """Solve at every resolution in ``cfg`` and measure errors against the exact solution."""
    problem = cfg.build_problem()
    if require_exact and problem.exact is None:
        raise ConfigurationError(
            f"problem {cfg.problem_name!r} has no exact solution; a convergence study needs one"
        )

    def work(N):
        est, seconds, exc = _solve_one(cfg, problem, N)
        hd = 1.0 / N if cfg.method == "linear" else float(N)
        secs = seconds if cfg.timing else None
        if exc is not None:
            return ReportRow(cfg.method, cfg.problem_name, N, hd, None, None, None, secs,
                             status="failed", message=f"{type(exc).__name__}: {exc}")
        err_sup = err_l2 = None
        if problem.exact is not None:
            err_sup, err_l2 = _measure(cfg, problem, est)
        note = "f clamped at x_domain_min" if getattr(est, "clamped_", False) else ""
        return ReportRow(cfg.method, cfg.problem_name, N, hd, err_sup, err_l2, int(est.n_iter_),
                         secs, max_residual=float(est.max_residual_), message=note)

    if cfg.jobs > 1 and len(cfg.resolutions) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(work, cfg.resolutions))
    else:
        rows = [work(N) for N in cfg.resolutions]

    report = ConvergenceReport(rows, cfg.method, cfg.problem_name, config=_config_echo(cfg))
    good = [r for r in rows if r.status == "ok" and r.err_sup is not None]
    if cfg.method == "linear":
        if len(good) >= 3:
            report.observed_order = observed_order([r.h_or_degree for r in good],
                                                   [r.err_sup for r in good])
    else:
        report.decay_factors = [
            a.err_sup / b.err_sup if b.err_sup > 0 else math.inf for a, b in zip(good, good[1:])
        ]
    return report


def _config_echo(cfg):
    d = asdict(cfg)
    d["resolutions"] = list(cfg.resolutions)
    return d


# ---------------------------------------------------------------------------
# existence


def meta_from_dict(spec):
    from .expr import compile_expr

    kw = {k: float(spec[k]) for k in ("M_G", "K_G", "M_f") if k in spec}
    for k in ("rho", "phi"):
        if k in spec:
            kw[k] = compile_expr(spec[k], ("t",))
    return RegularityMeta(**kw)


def run_existence(problem_or_meta, alpha, beta):
    """Integral factor, smallest admissible radius and the margin at twice that radius."""
    if isinstance(problem_or_meta, RegularityMeta):
        meta, name = problem_or_meta, "custom"
    elif isinstance(problem_or_meta, dict):
        meta, name = meta_from_dict(problem_or_meta), problem_or_meta.get("name", "custom")
    else:
        meta, name = registry(problem_or_meta).meta, problem_or_meta
    p = HolderParams(alpha, beta)
    report = {"problem": name, "alpha": alpha, "beta": beta}
    try:
        integral = existence_integral(meta, p)
    except DivergenceError as exc:
        report.update(status="divergent", message=str(exc), integral=None, factor=None,
                      r0=None, margin_at_2r0=None)
        return report
    factor = integral ** (p.alpha / p.beta)
    r0 = find_r0(meta, p)
    report.update(integral=integral, factor=factor, r0=r0)
    if r0 is None:
        report.update(status="not-satisfiable", margin_at_2r0=None)
    else:
        report.update(status="satisfiable", margin_at_2r0=existence_margin(meta, p, 2 * r0))
    return report


# ---------------------------------------------------------------------------
# interpolation bound


def run_interp_bound(func, alpha, beta, hs, samples=2**14, probe_per_cell=64):
    """Measured linear-interpolation error against the integral-Hoelder bound.

    ``func`` is a vectorized callable on [0, 1], a registry name (its exact
    solution is used) or an expression string in ``t``.
    """
    if isinstance(func, str):
        try:
            prob = registry(func)
        except KeyError:
            from .expr import compile_expr

            func = compile_expr(func, ("t",))
        else:
            if prob.exact is None:
                raise ConfigurationError(f"problem {func!r} has no exact solution")
            func = prob.exact
    p = HolderParams(alpha, beta)
    x = SampledFunction.from_callable(func, samples)
    rows = []
    for h in hs:
        N = round(1.0 / h)
        if not math.isclose(N * h, 1.0, rel_tol=1e-12):
            raise ConfigurationError(f"h={h} does not divide [0, 1] into whole cells")
        measured = observed_interp_error(func, Mesh.uniform(N), probe=probe_per_cell * N + 1)
        bound = interp_error_bound(x, p, h)
        ratio = 0.0 if measured == 0.0 else (measured / bound if bound > 0 else math.inf)
        rows.append({"h": h, "measured": measured, "bound": bound, "ratio": ratio})
    return rows
