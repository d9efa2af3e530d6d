"""Command-line front end: sweeps, optimization and validation reports.

Exit status: 0 success, 1 usage or configuration error, 2 numerical failure,
3 validation failure, 4 infeasible optimization.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import coverage as cov
from . import energy
from . import montecarlo as mc
from .config import Config, ConfigError, header_lines, load_config
from .csvio import write_csv
from .laplace import QuadratureError, UnsupportedOrderError
from .model import NetworkParams, db_to_linear
from .validation import SUITES, reference_tilt, run_suite

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VALIDATION, EXIT_INFEASIBLE = 0, 1, 2, 3, 4

SWEEP_VARIABLES = ("gamma_db", "theta_tilt_deg", "r_c_m", "lambda_m", "lambda_f", "beta")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise UsageError(f"unknown sweep variable {self.variable!r}; "
                             f"choose from {', '.join(SWEEP_VARIABLES)}")
        if self.steps < 2:
            raise UsageError("sweep needs at least 2 steps")
        if not self.start < self.stop:
            raise UsageError("sweep start must be below stop")

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        parts = text.split(":")
        if len(parts) != 4:
            raise UsageError(f"sweep {text!r} is not of the form variable:start:stop:steps")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError as exc:
            raise UsageError(f"bad sweep {text!r}: {exc}") from None

    def values(self) -> np.ndarray:
        if self.variable in ("lambda_m", "lambda_f") and self.start > 0:
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class Point:
    """One fully resolved evaluation point of a sweep."""

    params: NetworkParams
    gamma_m: float
    gamma_f: float
    theta: float
    r_c: float


def _resolve_point(params: NetworkParams, args, var: str | None, x: float | None) -> Point:
    gamma_m_db, gamma_f_db = args.gamma_db, args.gamma_f_db
    if gamma_f_db is None:
        gamma_f_db = gamma_m_db
    theta, r_c = args.tilt, args.r_c
    try:
        if var == "gamma_db":
            gamma_m_db = gamma_f_db = x
        elif var == "theta_tilt_deg":
            theta = x
        elif var == "r_c_m":
            r_c = x
        elif var == "lambda_m":
            params = replace(params, lambda_m=x)
        elif var == "lambda_f":
            params = replace(params, lambda_f=x)
        elif var == "beta":
            params = replace(params, path_loss=replace(params.path_loss, beta_blockage=x))
    except ValueError as exc:
        raise UsageError(f"sweep value {var}={x}: {exc}") from None
    if theta is None:
        theta = reference_tilt(params)
    return Point(params, float(db_to_linear(gamma_m_db)), float(db_to_linear(gamma_f_db)),
                 float(theta), float(r_c))


def _pool_map(fn, items, workers: int):
    """Ordered map, in-process for one worker."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- per-point evaluators (module level so worker processes can pickle them) --


def _coverage_point(job):
    pt, scenario, backend, lower = job
    p = pt.params
    if scenario == "homogeneous":
        if backend == "exact":
            return (cov.coverage_homogeneous(p, pt.gamma_m, pt.theta).value,)
        return (cov.coverage_homogeneous_approx(p, pt.gamma_m, pt.theta).value,)
    if backend == "exact":
        macro = cov.macro_hetnet_profile(p, pt.gamma_m, pt.theta, [pt.r_c])[0]
        femto = cov.femto_profile(p, pt.gamma_f, pt.theta, [pt.r_c])[0]
    else:
        m, f = cov.coverage_hetnet_approx(p, pt.gamma_m, pt.gamma_f, pt.theta, pt.r_c)
        macro, femto = m.value, f.value
    out = (float(macro), float(femto))
    if lower:
        out += (float(cov.femto_lower_bound_profile(p, pt.gamma_f, [pt.r_c])[0]),)
    return out


def _mc_coverage(points, scenario, drop, workers):
    """Monte Carlo coverage; SINR samples are shared by points with equal params and tilt."""
    cache: dict = {}
    rows = []
    for pt in points:
        key = (pt.params, pt.theta)
        if scenario == "homogeneous":
            if key not in cache:
                cache[key] = mc.homogeneous_sinr(pt.params, drop, pt.theta, workers)
            est = mc.EmpiricalEstimate.from_indicator(cache[key] > pt.gamma_m)
            rows.append((est.mean, est.ci95_halfwidth))
        else:
            key = key + (pt.r_c,)
            if key not in cache:
                cache[key] = mc.hetnet_sinr(pt.params, drop, pt.theta, [pt.r_c], workers)
            sm, sf = cache[key]
            em = mc.EmpiricalEstimate.from_indicator(sm[0] > pt.gamma_m)
            ef = mc.EmpiricalEstimate.from_indicator(sf[0] > pt.gamma_f)
            rows.append((em.mean, ef.mean, em.ci95_halfwidth, ef.ci95_halfwidth))
    return rows


def _ee_point(job):
    pt, scenario, backend, step, search_mode, bisect_tol = job
    p = pt.params
    if scenario == "homogeneous":
        search = energy.FULL_RANGE if search_mode == "full" else energy.tilt_range(p, mode="general")
        best = energy.optimize_tilt_exhaustive(p, pt.gamma_m, step, search, backend)
        bis = energy.optimize_tilt_bisection(p, pt.gamma_m, bisect_tol)
        ee_bis = energy.ee_homogeneous(p, pt.gamma_m, bis.theta_opt, backend)
        a, b = energy.two_dbf_baselines(p, pt.gamma_m, backend)
        return (best.theta_opt, best.ee_opt, bis.theta_opt, ee_bis, a, b)
    search = energy.FULL_RANGE if search_mode == "full" else energy.tilt_range(p, mode="general")
    grid = search.grid(step)
    ee = [energy.ee_hetnet(p, pt.gamma_m, pt.gamma_f, float(t), pt.r_c, backend) for t in grid]
    k = int(np.argmax(ee))
    a = energy.ee_hetnet(p, pt.gamma_m, pt.gamma_f, 0.0, pt.r_c, backend)
    b = energy.ee_hetnet(replace(p, vertical=None), pt.gamma_m, pt.gamma_f, 0.0, pt.r_c, backend)
    return (float(grid[k]), float(ee[k]), a, b)


def _tilt_point(job):
    pt, scenario, backend = job
    if scenario == "homogeneous":
        return (energy.ee_homogeneous(pt.params, pt.gamma_m, pt.theta, backend),)
    h = energy.hetnet_profile(pt.params, pt.gamma_m, pt.gamma_f, pt.theta, [pt.r_c], backend)
    return (float(h.ee[0]), float(h.macro[0]), float(h.femto[0]))


# -- output helpers -----------------------------------------------------------


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.stream = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.stream

    def __exit__(self, *exc):
        if self.path:
            self.stream.close()


def _emit(args, cfg: Config, columns, rows, extra_header=()):
    digest = cfg.digest()
    header = [f"command={args.command}"] + list(extra_header) + header_lines(cfg)
    with _Output(args.output) as out:
        write_csv(out, list(columns) + ["config_hash"], [list(r) + [digest] for r in rows],
                  header)
    if getattr(args, "emit_plot_script", None):
        _write_plot_script(args.emit_plot_script, args.output, columns)


PLOT_TEMPLATE = '''"""Plot a mmwave-ee CSV: first column on x, every other numeric column on y."""
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else {default!r}
with open(path) as fh:
    lines = [ln for ln in fh if not ln.startswith("#")]
names = lines[0].strip().split(",")
data = [row.strip().split(",") for row in lines[1:] if row.strip()]


def column(j):
    try:
        return np.array([float(r[j]) for r in data])
    except ValueError:
        return None


x = column(0)
fig, ax = plt.subplots()
for j, name in enumerate(names[1:], start=1):
    y = column(j)
    if y is not None and name in {ycols!r}:
        ax.plot(x, y, marker="o", label=name)
ax.set_xlabel(names[0])
ax.legend()
ax.grid(True, alpha=0.3)
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''


def _write_plot_script(path, csv_path, columns):
    ycols = [c for c in columns[1:] if not c.startswith(("method", "is_"))]
    Path(path).write_text(PLOT_TEMPLATE.format(default=csv_path or "sweep.csv", ycols=ycols))


# -- commands -------------------------------------------------------------------


def _sweep_points(cfg: Config, args) -> tuple[str | None, list[float], list[Point]]:
    params = cfg.network()
    spec = SweepSpec.parse(args.sweep) if args.sweep else None
    if spec is None:
        return None, [math.nan], [_resolve_point(params, args, None, None)]
    xs = [float(x) for x in spec.values()]
    return spec.variable, xs, [_resolve_point(params, args, spec.variable, x) for x in xs]


def _require_hetnet(points):
    if any(pt.params.lambda_f <= 0 for pt in points):
        raise UsageError("hetnet scenario needs network.lambda_f > 0")


def cmd_dist(cfg: Config, args) -> int:
    params = cfg.network()
    if args.sweep:
        spec = SweepSpec.parse(args.sweep)
        if spec.variable not in ("lambda_m", "beta"):
            raise UsageError("dist sweeps support lambda_m or beta")
        rows = []
        for x in spec.values():
            pt = _resolve_point(params, args, spec.variable, float(x))
            dist = cov.serving_distance(pt.params.path_loss, pt.params.lambda_m)
            rho0, rho1 = dist.quantile_bounds(args.epsilon)
            mean = dist.mean()
            rows.append((float(x), mean, rho0, rho1, (rho1 - rho0) / mean))
        _emit(args, cfg, [spec.variable, "rho_bar_m", "rho0_m", "rho1_m", "spread_ratio"], rows,
              [f"epsilon={args.epsilon}"])
        return EXIT_OK
    dist = cov.serving_distance(params.path_loss, params.lambda_m)
    r_hi = args.r_max or dist.inverse_ccdf(1e-4)
    r = np.linspace(r_hi / args.points, r_hi, args.points)
    rows = zip(r, dist.pdf(r), dist.cdf(r), dist.ccdf(r))
    rho0, rho1 = dist.quantile_bounds(args.epsilon)
    _emit(args, cfg, ["r_m", "pdf", "cdf", "ccdf"], rows,
          [f"rho_bar_m={dist.mean()!r}", f"rho0_m={rho0!r}", f"rho1_m={rho1!r}",
           f"epsilon={args.epsilon}"])
    return EXIT_OK


def cmd_coverage_sweep(cfg: Config, args) -> int:
    var, xs, points = _sweep_points(cfg, args)
    hetnet = args.scenario == "hetnet"
    if hetnet:
        _require_hetnet(points)
    if args.backend == "mc":
        drop = cfg.drop(args.scenario, args.n_drops, args.seed)
        vals = _mc_coverage(points, args.scenario, drop, args.workers)
        cols = ["macro", "femto", "macro_ci95", "femto_ci95"] if hetnet else ["coverage", "ci95"]
        method = "monte-carlo"
    else:
        jobs = [(pt, args.scenario, args.backend, args.lower_bound and hetnet) for pt in points]
        vals = _pool_map(_coverage_point, jobs, args.workers)
        cols = (["macro", "femto"] + (["femto_lower_bound"] if args.lower_bound else [])
                if hetnet else ["coverage"])
        method = "exact-analytic" if args.backend == "exact" else "taylor-approx"
    rows = [(x, *v, method) for x, v in zip(xs, vals)]
    _emit(args, cfg, [var or "point"] + cols + ["method"], rows,
          [f"scenario={args.scenario}", f"backend={args.backend}"])
    return EXIT_OK


def cmd_ee_sweep(cfg: Config, args) -> int:
    var, xs, points = _sweep_points(cfg, args)
    hetnet = args.scenario == "hetnet"
    if hetnet:
        _require_hetnet(points)
    header = [f"scenario={args.scenario}", f"backend={args.backend}"]
    if var == "theta_tilt_deg":
        # EE against tilt, with the optimizers' answers and the tilt-range bounds marked
        vals = _pool_map(_tilt_point, [(pt, args.scenario, args.backend) for pt in points],
                         args.workers)
        p0 = points[0]
        rng = energy.tilt_range(p0.params, args.epsilon, "dense")
        ee = [v[0] for v in vals]
        k = int(np.argmax(ee))
        cols = ["theta_tilt_deg", "ee"] + (["macro", "femto"] if hetnet else [])
        cols += ["is_exhaustive_argmax", "range_min_deg", "range_max_deg"]
        rows = [(x, *v, int(j == k), rng.theta_min, rng.theta_max)
                for j, (x, v) in enumerate(zip(xs, vals))]
        if not hetnet:
            bis = energy.optimize_tilt_bisection(p0.params, p0.gamma_m, args.tol, rng)
            header += [f"theta_bisection_deg={bis.theta_opt!r}",
                       f"bisection_evaluations={bis.evaluations}"]
            cols.append("theta_bisection_deg")
            rows = [r + (bis.theta_opt,) for r in rows]
        _emit(args, cfg, cols, rows, header)
        return EXIT_OK
    jobs = [(pt, args.scenario, args.backend, args.grid_step, args.tilt_search, args.tol)
            for pt in points]
    vals = _pool_map(_ee_point, jobs, args.workers)
    if hetnet:
        cols = ["theta_opt_deg", "ee_opt_tilt", "ee_2dbf_a", "ee_2dbf_b"]
    else:
        cols = ["theta_opt_deg", "ee_opt_tilt", "theta_bisection_deg", "ee_bisection",
                "ee_2dbf_a", "ee_2dbf_b"]
    rows = [(x, *v) for x, v in zip(xs, vals)]
    _emit(args, cfg, [var or "point"] + cols, rows,
          header + ["ee_2dbf_a=zero tilt", "ee_2dbf_b=no elevation pattern"])
    return EXIT_OK


def cmd_optimize(cfg: Config, args) -> int:
    params = cfg.network()
    pt = _resolve_point(params, args, None, None)
    if args.scenario == "homogeneous":
        if args.method == "bisection":
            out = energy.optimize_tilt_bisection(params, pt.gamma_m, args.tol,
                                                 rule=args.rule)
        else:
            search = (energy.FULL_RANGE if args.tilt_search == "full"
                      else energy.tilt_range(params, mode="general"))
            out = energy.optimize_tilt_exhaustive(params, pt.gamma_m, args.grid_step, search,
                                                  args.backend)
        trace_cols = ["theta_tilt_deg", "ee"]
    else:
        _require_hetnet([pt])
        backend = "approx" if args.method == "bisection" else args.backend
        out = energy.optimize_hetnet_joint(params, pt.gamma_m, pt.gamma_f, args.eps_m,
                                           args.eps_f, args.grid_step, args.r_c_step, backend)
        trace_cols = ["theta_tilt_deg", "r_c_m", "ee", "macro", "femto"]
    report = {
        "scenario": args.scenario,
        "method": out.method,
        "theta_opt_deg": out.theta_opt,
        "r_c_opt_m": out.r_c_opt,
        "ee_opt": out.ee_opt,
        "evaluations": out.evaluations,
        "evaluation_bound": out.evaluation_bound,
        "feasible": out.feasible,
        "unimodal": out.unimodal,
        "violation": out.violation,
        "config_hash": cfg.digest(),
    }
    if out.search_range is not None:
        report["search_min_deg"] = out.search_range.theta_min
        report["search_max_deg"] = out.search_range.theta_max
    if out.r_c_opt is not None or args.scenario == "homogeneous":
        report["ee_opt_exact"] = energy.evaluate_outcome_exact(params, out, pt.gamma_m, pt.gamma_f)
    with _Output(args.output) as stream:
        for key, value in report.items():
            if value is not None:
                stream.write(f"{key}={value}\n")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            write_csv(fh, trace_cols + ["config_hash"],
                      [list(t) + [cfg.digest()] for t in out.trace],
                      ["command=optimize", f"method={out.method}"] + header_lines(cfg))
    return EXIT_OK if out.feasible else EXIT_INFEASIBLE


def cmd_validate(cfg: Config, args) -> int:
    params = cfg.network()
    drop = cfg.drop("homogeneous", args.n_drops, args.seed)
    rows = run_suite(args.suite, params, drop, args.workers)
    table = [(r.quantity, r.analytic, r.empirical, r.ci95, r.tolerance,
              "pass" if r.passed else "fail") for r in rows]
    # config hash first, as in the report layout
    digest = cfg.digest()
    with _Output(args.output) as out:
        write_csv(out, ["config_hash", "quantity", "analytic", "empirical", "ci95", "tolerance",
                        "result"], [(digest, *t) for t in table],
                  ["command=validate", f"suite={args.suite}", f"n_drops={drop.n_drops}",
                   f"seed={drop.rng_seed}"] + header_lines(cfg))
    failed = sum(not r.passed for r in rows)
    print(f"{args.suite}: {len(rows) - failed}/{len(rows)} checks passed", file=sys.stderr)
    return EXIT_VALIDATION if failed else EXIT_OK


# -- parser --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("-c", "--config", help="INI configuration file")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one configuration value (repeatable)")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")


def _point_args(p: argparse.ArgumentParser):
    p.add_argument("--scenario", choices=("homogeneous", "hetnet"), default="homogeneous")
    p.add_argument("--gamma-db", type=float, default=0.0, help="SINR threshold, dB")
    p.add_argument("--gamma-f-db", type=float, help="femto SINR threshold, dB (default: --gamma-db)")
    p.add_argument("--tilt", type=float, help="tilt in degrees (default: toward mean serving distance)")
    p.add_argument("--r-c", type=float, default=0.0, help="sleep radius, m")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmwave-ee", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sweep_help = "variable:start:stop:steps with variable in " + ", ".join(SWEEP_VARIABLES)

    p = sub.add_parser("dist", help="serving-distance law or its spread against density")
    _common(p)
    p.add_argument("--sweep", help="lambda_m or beta sweep, " + sweep_help)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--r-max", type=float, help="largest distance in the table, m")
    p.set_defaults(func=cmd_dist, tilt=None, gamma_db=0.0, gamma_f_db=None, r_c=0.0)

    p = sub.add_parser("coverage-sweep", help="coverage probability along one sweep axis")
    _common(p)
    _point_args(p)
    p.add_argument("--sweep", help=sweep_help)
    p.add_argument("--backend", choices=("exact", "approx", "mc"), default="exact")
    p.add_argument("--lower-bound", action="store_true", help="add the femto lower-bound column")
    p.add_argument("--n-drops", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--emit-plot-script", metavar="PATH")
    p.set_defaults(func=cmd_coverage_sweep)

    p = sub.add_parser("ee-sweep", help="optimized-tilt EE and non-tilting baselines")
    _common(p)
    _point_args(p)
    p.add_argument("--sweep", help=sweep_help)
    p.add_argument("--backend", choices=("exact", "approx"), default="exact")
    p.add_argument("--grid-step", type=float, default=energy.DEFAULT_TILT_STEP)
    p.add_argument("--tilt-search", choices=("full", "general"), default="full")
    p.add_argument("--tol", type=float, default=energy.DEFAULT_TILT_STEP)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--emit-plot-script", metavar="PATH")
    p.set_defaults(func=cmd_ee_sweep)

    p = sub.add_parser("optimize", help="tilt (and sleep radius) optimization")
    _common(p)
    _point_args(p)
    p.add_argument("--method", choices=("exhaustive", "bisection"), default="bisection",
                   help="hetnet: exhaustive grid on the chosen backend, or bisection = approx grid")
    p.add_argument("--backend", choices=("exact", "approx"), default="exact")
    p.add_argument("--rule", choices=("slope", "printed"), default="slope")
    p.add_argument("--tol", type=float, default=energy.DEFAULT_TILT_STEP)
    p.add_argument("--grid-step", type=float, default=energy.DEFAULT_TILT_STEP)
    p.add_argument("--tilt-search", choices=("full", "general"), default="full")
    p.add_argument("--r-c-step", type=float)
    p.add_argument("--eps-m", type=float, default=0.2)
    p.add_argument("--eps-f", type=float, default=0.7)
    p.add_argument("--trace", help="write the evaluation trace CSV here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("validate", help="analytic vs Monte Carlo report")
    _common(p)
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--n-drops", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        cfg = load_config(args.config, args.set)
        return args.func(cfg, args)
    except (UsageError, ConfigError) as exc:
        print(f"mmwave-ee: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, UnsupportedOrderError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"mmwave-ee: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"mmwave-ee: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
