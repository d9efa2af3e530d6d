"""Energy efficiency objectives and the tilt / sleep-radius optimizers."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

from . import coverage as cov
from .laplace import laplace_scaled_from_exponent, nakagami_conditional_coverage
from .model import NetworkParams

Backend = Literal["exact", "approx"]
DEFAULT_TILT_STEP = 0.25
DEFAULT_RC_DIVISIONS = 64


def rate_factor(gamma) -> float:
    """Spectral efficiency ``log2(1 + gamma)`` in bit/s/Hz."""
    return float(np.log2(1.0 + gamma))


def hetnet_power_density(params: NetworkParams) -> float:
    """Consumed power per unit area, W/m^2 (all FBSs counted, sleeping or not)."""
    return params.lambda_m * params.macro_power_per_bs + params.lambda_f * params.femto_power_per_bs


def _check_backend(backend):
    if backend not in ("exact", "approx"):
        raise ValueError(f"unknown backend {backend!r}")


def ee_homogeneous(params: NetworkParams, gamma, theta_tilt, backend: Backend = "exact") -> float:
    """Coverage-weighted rate per watt of one MBS, bit/s/Hz/W."""
    _check_backend(backend)
    if backend == "exact":
        c = cov.coverage_homogeneous(params, gamma, theta_tilt).value
    else:
        c = cov.coverage_homogeneous_approx(params, gamma, theta_tilt).value
    return c * rate_factor(gamma) / params.macro_power_per_bs


@dataclass(frozen=True)
class HetnetPoint:
    ee: np.ndarray
    macro: np.ndarray
    femto: np.ndarray


def hetnet_profile(params: NetworkParams, gamma_m, gamma_f, theta_tilt, r_c_values,
                   backend: Backend = "exact") -> HetnetPoint:
    """EE and both coverages over a set of sleep radii at one tilt.

    The femto coverage includes the awake-probability factor, so weighting it
    by ``lambda_f`` equals weighting the conditional coverage by the active
    density.
    """
    _check_backend(backend)
    r_c = np.atleast_1d(np.asarray(r_c_values, dtype=float))
    if backend == "exact":
        macro = cov.macro_hetnet_profile(params, gamma_m, theta_tilt, r_c)
        femto = cov.femto_profile(params, gamma_f, theta_tilt, r_c)
    else:
        macro = np.clip(cov.macro_hetnet_approx_profile(params, gamma_m, theta_tilt, r_c), 0, 1)
        femto = np.clip(cov.femto_approx_profile(params, gamma_f, theta_tilt, r_c), 0, 1)
    num = (params.lambda_m * macro * rate_factor(gamma_m)
           + params.lambda_f * femto * rate_factor(gamma_f))
    return HetnetPoint(num / hetnet_power_density(params), macro, femto)


def ee_hetnet(params: NetworkParams, gamma_m, gamma_f, theta_tilt, r_c,
              backend: Backend = "exact") -> float:
    """Area EE of the two-tier network, bit/s/Hz/W."""
    return float(hetnet_profile(params, gamma_m, gamma_f, theta_tilt, [r_c], backend).ee[0])


# -- tilt range ------------------------------------------------------------


@dataclass(frozen=True)
class TiltRange:
    theta_min: float
    theta_max: float

    def __post_init__(self):
        if not 0.0 <= self.theta_min <= self.theta_max <= 90.0:
            raise ValueError(f"invalid tilt range [{self.theta_min}, {self.theta_max}]")

    @property
    def width(self) -> float:
        return self.theta_max - self.theta_min

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.theta_min + self.theta_max)

    def grid(self, step: float) -> np.ndarray:
        n = int(math.floor(self.width / step + 1e-9))
        pts = self.theta_min + step * np.arange(n + 1)
        if self.theta_max - pts[-1] > 1e-9:
            pts = np.append(pts, self.theta_max)
        return pts


FULL_RANGE = TiltRange(0.0, 90.0)


def tilt_range(params: NetworkParams, epsilon: float = 0.1,
               mode: Literal["dense", "general"] = "dense") -> TiltRange:
    """Tilts that can put the main lobe on the likely serving distances.

    ``dense`` uses the mean serving distance for both ends; ``general`` uses
    the ``epsilon`` quantile bounds ``(rho0, rho1)``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if params.vertical is None:
        return FULL_RANGE
    pat = params.vertical
    theta0 = pat.half_span
    dist = cov.serving_distance(params.path_loss, params.lambda_m)
    if mode == "dense":
        near = far = dist.mean()
    elif mode == "general":
        near, far = dist.quantile_bounds(epsilon)
    else:
        raise ValueError(f"unknown tilt-range mode {mode!r}")
    lo = math.degrees(math.atan(pat.h_eff / far)) - theta0
    hi = math.degrees(math.atan(pat.h_eff / near)) + theta0
    return TiltRange(min(max(0.0, lo), 90.0), min(hi, 90.0))


# -- optimizers ------------------------------------------------------------


@dataclass
class OptimizationOutcome:
    theta_opt: float
    ee_opt: float
    method: Literal["exhaustive", "bisection", "approx-grid"]
    evaluations: int
    trace: list[tuple] = field(default_factory=list)
    r_c_opt: float | None = None
    feasible: bool = True
    unimodal: bool = True
    search_range: TiltRange | None = None
    coverage: tuple[float, ...] = ()
    violation: float = 0.0
    evaluation_bound: int | None = None


def optimize_tilt_exhaustive(params: NetworkParams, gamma, grid_step: float = DEFAULT_TILT_STEP,
                             search: TiltRange | None = None,
                             backend: Backend = "exact") -> OptimizationOutcome:
    """Grid argmax of the homogeneous EE; the full 0..90 degree range by default."""
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    search = search or FULL_RANGE
    trace = [(float(t), ee_homogeneous(params, gamma, t, backend)) for t in search.grid(grid_step)]
    best = max(trace, key=lambda p: p[1])
    return OptimizationOutcome(best[0], best[1], "exhaustive", len(trace), trace,
                               search_range=search)


def _approx_objective(params: NetworkParams, gamma):
    """Homogeneous approx-backend EE as a function of a possibly complex tilt."""
    rho_bar = np.asarray(cov.mean_serving_distance(params))
    scale = rate_factor(gamma) / params.macro_power_per_bs

    def f(theta):
        z, a = cov.macro_mbs_exponent(params, gamma, theta, rho_bar)
        c = nakagami_conditional_coverage(laplace_scaled_from_exponent(a), z, params.sigma2,
                                          params.m)
        return complex(c) * scale

    return f


def _is_unimodal(trace, rtol=1e-9) -> bool:
    pts = sorted(trace)
    vals = np.array([v for _, v in pts])
    if vals.size < 3:
        return True
    tol = rtol * max(np.max(np.abs(vals)), 1e-300)
    peak = int(np.argmax(vals))
    rising = np.all(np.diff(vals[: peak + 1]) >= -tol)
    falling = np.all(np.diff(vals[peak:]) <= tol)
    return bool(rising and falling)


def optimize_tilt_bisection(params: NetworkParams, gamma, tol: float = DEFAULT_TILT_STEP,
                            search: TiltRange | None = None,
                            rule: Literal["slope", "printed"] = "slope",
                            objective: Callable[[complex], complex] | None = None,
                            ) -> OptimizationOutcome:
    """Bracket shrinking on the approx-backend EE within the tilt range.

    ``rule="slope"`` keeps the half that the objective's slope at the
    midpoint points into; the slope comes from a complex-step derivative of
    the same evaluation, so each iteration costs one objective call.
    ``rule="printed"`` compares the midpoint value with the value at the lower
    bracket end.  Both return the midpoint of the final bracket; a flat
    objective stops at once.

    The returned ``unimodal`` flag is False when the evaluated points are not
    consistent with a single peak.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    search = search or tilt_range(params)
    f = objective or _approx_objective(params, gamma)
    h = 1e-20
    lo, hi = search.theta_min, search.theta_max
    trace: list[tuple[float, float]] = []
    evals = 0

    def value(theta, slope=False):
        nonlocal evals
        evals += 1
        if slope:
            out = f(theta + 1j * h)
            v, d = out.real, out.imag / h
        else:
            v, d = f(theta).real, 0.0
        trace.append((float(theta), float(v)))
        return v, d

    if rule == "printed":
        f_lo, _ = value(lo)
    elif rule != "slope":
        raise ValueError(f"unknown bisection rule {rule!r}")

    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if rule == "slope":
            v, d = value(mid, slope=True)
            if abs(d) <= 1e-12 * max(abs(v), 1e-300):
                lo = hi = mid
                break
            if d > 0:
                lo = mid
            else:
                hi = mid
        else:
            v, _ = value(mid)
            if abs(v - f_lo) <= 1e-12 * max(abs(v), 1e-300):
                lo = hi = mid
                break
            if v > f_lo:
                lo, f_lo = mid, v
            else:
                hi = mid

    theta = 0.5 * (lo + hi)
    known = dict(trace)
    v = known[theta] if theta in known else value(theta)[0]
    consistent = _is_unimodal(trace)
    if not consistent:
        warnings.warn("bisection saw a non-unimodal objective; result may be a local optimum",
                      RuntimeWarning, stacklevel=2)
    return OptimizationOutcome(theta, float(v), "bisection", evals, trace,
                               unimodal=consistent, search_range=search,
                               evaluation_bound=bisection_evaluation_bound(search.width, tol))


def bisection_evaluation_bound(width: float, tol: float) -> int:
    if width <= 0:
        return 1
    return max(int(math.ceil(math.log2(width / tol))), 0) + 1


def optimize_hetnet_joint(params: NetworkParams, gamma_m, gamma_f, eps_m: float, eps_f: float,
                          theta_step: float = DEFAULT_TILT_STEP, r_c_step: float | None = None,
                          backend: Backend = "exact", search: TiltRange | None = None,
                          ) -> OptimizationOutcome:
    """Feasibility-filtered grid search over (tilt, sleep radius).

    The exact backend searches ``search`` (full range by default); the approx
    backend searches the dense-mode tilt range.  Infeasible problems return
    the point with the smallest constraint violation and ``feasible=False``.
    """
    for eps in (eps_m, eps_f):
        if not 0.0 < eps < 1.0:
            raise ValueError("coverage requirements eps must lie in (0, 1)")
    _check_backend(backend)
    r_c_step = r_c_step or params.r_c_max / DEFAULT_RC_DIVISIONS
    n_rc = int(math.floor(params.r_c_max / r_c_step + 1e-9))
    r_c = np.minimum(r_c_step * np.arange(n_rc + 1), params.r_c_max)
    if params.r_c_max - r_c[-1] > 1e-9:
        r_c = np.append(r_c, params.r_c_max)
    if search is None:
        search = FULL_RANGE if backend == "exact" else tilt_range(params)
    need_m, need_f = 1.0 - eps_m, 1.0 - eps_f

    trace = []
    best = best_bad = None
    for theta in search.grid(theta_step):
        pt = hetnet_profile(params, gamma_m, gamma_f, float(theta), r_c, backend)
        for j, rc in enumerate(r_c):
            ee, pm, pf = float(pt.ee[j]), float(pt.macro[j]), float(pt.femto[j])
            trace.append((float(theta), float(rc), ee, pm, pf))
            short = max(need_m - pm, 0.0) + max(need_f - pf, 0.0)
            if short <= 0.0:
                if best is None or ee > best[2]:
                    best = trace[-1]
            elif best_bad is None or short < best_bad[0] or (short == best_bad[0] and ee > best_bad[1][2]):
                best_bad = (short, trace[-1])
    method = "exhaustive" if backend == "exact" else "approx-grid"
    if best is not None:
        return OptimizationOutcome(best[0], best[2], method, len(trace), trace, r_c_opt=best[1],
                                   search_range=search, coverage=(best[3], best[4]))
    short, pt = best_bad
    return OptimizationOutcome(pt[0], pt[2], method, len(trace), trace, r_c_opt=pt[1],
                               feasible=False, search_range=search, coverage=(pt[3], pt[4]),
                               violation=short)


def evaluate_outcome_exact(params: NetworkParams, outcome: OptimizationOutcome, gamma_m,
                           gamma_f=None) -> float:
    """Exact-backend EE at an outcome's decision (homogeneous if ``r_c_opt`` is None)."""
    if outcome.r_c_opt is None:
        return ee_homogeneous(params, gamma_m, outcome.theta_opt, "exact")
    return ee_hetnet(params, gamma_m, gamma_f, outcome.theta_opt, outcome.r_c_opt, "exact")


def two_dbf_baselines(params: NetworkParams, gamma, backend: Backend = "exact") -> tuple[float, float]:
    """EE of the two non-tilting references: zero tilt, and no elevation pattern."""
    flat = ee_homogeneous(params, gamma, 0.0, backend)
    no_pattern = ee_homogeneous(replace(params, vertical=None), gamma, 0.0, backend)
    return flat, no_pattern
