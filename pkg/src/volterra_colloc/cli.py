"""Command-line driver.

Subcommands: ``solve``, ``converge``, ``existence``, ``interp-bound`` and
``list-problems``. Exit status is 0 iff every requested run converged.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .exceptions import ConfigurationError
from .harness import ExperimentConfig, run_convergence, run_existence, run_interp_bound
from .problem import available_problems, registry

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_USAGE = 2


def parse_resolutions(n=None, n_range=None):
    """``--N 4,8,16`` or ``--N-range lo:hi:step`` / ``dyadic:lo:hi`` (powers of two)."""
    if n is not None and n_range is not None:
        raise ConfigurationError("give either --N or --N-range, not both")
    if n is not None:
        if isinstance(n, (list, tuple)):
            return [int(v) for v in n]
        return [int(v) for v in str(n).split(",") if v.strip()]
    if n_range is None:
        return None
    parts = str(n_range).split(":")
    try:
        if parts[0] == "dyadic":
            lo, hi = int(parts[1]), int(parts[2])
            return [2**k for k in range(lo, hi + 1)]
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) > 2 else 1
    except (IndexError, ValueError):
        raise ConfigurationError(f"bad --N-range {n_range!r}") from None
    if step < 1:
        raise ConfigurationError("--N-range step must be >= 1")
    return list(range(lo, hi + 1, step))


def parse_h_list(text):
    """Comma list of step sizes, or ``dyadic:a:b`` for 2^-a .. 2^-b."""
    text = str(text)
    if text.startswith("dyadic:"):
        _, a, b = text.split(":")
        return [2.0 ** -k for k in range(int(a), int(b) + 1)]
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_beta(text):
    if str(text).lower() in ("inf", "infinity", "infinite"):
        return math.inf
    return float(text)


def _load_config(path):
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a flat JSON object")
    return data


def _problem_from(args, conf):
    if args.problem is not None:
        return args.problem
    if "problem" in conf:
        return conf["problem"]
    inline = {k: conf[k] for k in ("G", "f", "g", "exact", "x_domain_min", "name") if k in conf}
    if inline:
        return inline
    raise ConfigurationError("no problem given: use --problem NAME or --config PATH")


def _experiment(args, single=False):
    conf = _load_config(args.config) if args.config else {}

    def pick(attr, key=None, default=None):
        v = getattr(args, attr, None)
        if v is not None:
            return v
        return conf.get(key or attr, default)

    res = parse_resolutions(args.N, args.N_range)
    if res is None:
        cn = conf.get("N")
        res = parse_resolutions(cn if not (isinstance(cn, str) and ":" in cn) else None,
                                cn if isinstance(cn, str) and ":" in cn else None)
    if res is None:
        res = [64] if single else [16, 32, 64, 128]
    if single and len(res) != 1:
        raise ConfigurationError("solve takes a single N")
    method = pick("method", default="linear")
    quad = pick("quad", default="trapezoid:1")
    quad_order = None
    if method == "spectral" and quad.startswith("gauss:"):
        quad_order = int(quad.split(":")[1])
    return ExperimentConfig(
        problem=_problem_from(args, conf),
        method=method,
        resolutions=res,
        quad=quad,
        quad_order=quad_order if quad_order is not None else conf.get("quad_order"),
        tol=pick("tol"),
        probe=pick("probe"),
        error_at=pick("error_at"),
        jobs=pick("jobs", default=1),
        timing=bool(args.timing or conf.get("timing", False)),
        out=pick("out"),
        format=pick("format", default="csv"),
    )


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_failures(report):
    for r in report.rows:
        if r.status != "ok":
            print(f"N={r.N}: {r.status}: {r.message}", file=sys.stderr)
        elif r.message:
            print(f"N={r.N}: warning: {r.message}", file=sys.stderr)


def cmd_converge(args, single=False):
    cfg = _experiment(args, single=single)
    report = run_convergence(cfg, require_exact=not single)
    _emit(report.to_csv() if cfg.format == "csv" else report.to_json() + "\n", cfg.out)
    if cfg.method == "linear" and report.observed_order is not None:
        print(f"observed order: {report.observed_order:.4f}", file=sys.stderr)
    elif report.decay_factors:
        print("decay factors: " + ", ".join(f"{d:.3g}" for d in report.decay_factors),
              file=sys.stderr)
    if single and args.dump and report.ok:
        est = cfg.estimator(cfg.resolutions[0]).fit(cfg.build_problem())
        nodes = est.mesh_.nodes if cfg.method == "linear" else est.nodes_
        np.savetxt(args.dump, np.column_stack([nodes, est.values_]), delimiter=",",
                   header="t,x", comments="", fmt="%.17g")
    _report_failures(report)
    return EXIT_OK if report.ok else EXIT_RUN_FAILED


def cmd_existence(args):
    conf = _load_config(args.config) if args.config else {}
    alpha = args.alpha if args.alpha is not None else conf.get("alpha")
    beta = args.beta if args.beta is not None else conf.get("beta")
    if alpha is None or beta is None:
        raise ConfigurationError("existence needs --alpha and --beta")
    beta = _parse_beta(beta)
    if args.problem is not None:
        target = args.problem
    elif "problem" in conf:
        target = conf["problem"]
    else:
        target = {k: conf[k] for k in ("M_G", "K_G", "M_f", "rho", "phi", "name") if k in conf}
    report = run_existence(target, float(alpha), beta)
    if args.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        lines = [f"{k}: {report[k]}" for k in
                 ("problem", "alpha", "beta", "status", "integral", "factor", "r0", "margin_at_2r0")]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_interp_bound(args):
    func = args.function if args.function is not None else args.problem
    if func is None:
        raise ConfigurationError("interp-bound needs --problem NAME or --function EXPR")
    rows = run_interp_bound(func, args.alpha, _parse_beta(args.beta), parse_h_list(args.h),
                            samples=args.samples)
    if args.format == "json":
        _emit(json.dumps(rows, indent=2) + "\n", args.out)
    else:
        text = "h,measured,bound,ratio\n" + "".join(
            ",".join(format(r[k], ".17g") for k in ("h", "measured", "bound", "ratio")) + "\n"
            for r in rows
        )
        _emit(text, args.out)
    return EXIT_OK


def cmd_list(args):
    for name in available_problems():
        p = registry(name)
        tag = "exact" if p.exact is not None else "no exact solution"
        print(f"{name}\t({tag})")
    return EXIT_OK


def _solver_flags(sp, single):
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--problem", help="registry problem name")
    src.add_argument("--config", help="flat JSON config file")
    sp.add_argument("--method", choices=("linear", "spectral"))
    grid = sp.add_mutually_exclusive_group()
    grid.add_argument("--N", help="resolution(s), comma separated")
    if not single:
        grid.add_argument("--N-range", dest="N_range", help="lo:hi:step or dyadic:lo:hi")
    sp.add_argument("--quad", help="trapezoid:k or gauss:m (per subinterval / per [0,t_n])")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--probe", type=int, help="number of probe points for error measurement")
    sp.add_argument("--error-at", dest="error_at", choices=("nodes", "probe"))
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--timing", action="store_true", help="fill the seconds column")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "json"))
    if single:
        sp.add_argument("--dump", help="write node values t,x to this CSV file")
        sp.set_defaults(N_range=None)
    else:
        sp.set_defaults(dump=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="volterra-colloc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="one solve at a single resolution")
    _solver_flags(sp, single=True)
    sp.set_defaults(func=lambda a: cmd_converge(a, single=True))

    sp = sub.add_parser("converge", help="convergence study over several resolutions")
    _solver_flags(sp, single=False)
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("existence", help="check the invariant-ball existence condition")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--problem")
    src.add_argument("--config")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_existence)

    sp = sub.add_parser("interp-bound", help="measured interpolation error vs the bound")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--problem")
    src.add_argument("--function", help="expression in t, e.g. 'sqrt(t)'")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", default="inf")
    sp.add_argument("--h", default="dyadic:3:7", help="comma list or dyadic:a:b")
    sp.add_argument("--samples", type=int, default=2**14)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_interp_bound)

    sp = sub.add_parser("list-problems", help="list built-in problems")
    sp.set_defaults(func=cmd_list)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
