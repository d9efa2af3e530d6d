"""Analytic-vs-Monte-Carlo validation suites.

Each suite returns :class:`CheckRow` records.  ``analytic`` and ``empirical``
hold the two numbers being compared; ``tolerance`` is the allowed absolute
difference (or the cap on a statistic, see ``quantity``).  Rows whose
``tolerance`` is NaN are informational and always pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import stats

from . import coverage as cov
from . import montecarlo as mc
from .model import FadingModel, NetworkParams, db_to_linear

GAMMA_GRID_DB = (-10.0, 0.0, 10.0, 20.0)
FADING_GRID = (1, 5)
BETA_GRID = (0.003, 0.006)
RC_FRACTIONS = (0.0, 0.5, 1.0)
HETNET_DENSITY_RATIO = 10.0


@dataclass(frozen=True)
class CheckRow:
    quantity: str
    analytic: float
    empirical: float
    ci95: float
    tolerance: float
    passed: bool


def _row(quantity, analytic, empirical, ci95, tol) -> CheckRow:
    if math.isnan(tol):
        return CheckRow(quantity, analytic, empirical, ci95, tol, True)
    ok = abs(analytic - empirical) <= max(tol, 2.0 * ci95)
    return CheckRow(quantity, float(analytic), float(empirical), float(ci95), float(tol), bool(ok))


def _cap_row(quantity, value, cap) -> CheckRow:
    return CheckRow(quantity, 0.0, float(value), 0.0, float(cap), bool(value < cap))


def reference_tilt(params: NetworkParams) -> float:
    """Tilt that points the main lobe at the mean serving distance, degrees."""
    if params.vertical is None:
        return 0.0
    return math.degrees(math.atan(params.vertical.h_eff / cov.mean_serving_distance(params)))


def _variants(params: NetworkParams):
    for m in FADING_GRID:
        for beta in BETA_GRID:
            p = replace(params, fading=FadingModel(m),
                        path_loss=replace(params.path_loss, beta_blockage=beta))
            yield f"m={m} beta={beta}", p


def suite_lemma1(params: NetworkParams, drop: mc.DropConfig, workers: int = 1) -> list[CheckRow]:
    """Serving-distance law: KS statistic, mean and total mass."""
    dist = cov.serving_distance(params.path_loss, params.lambda_m)
    samples = mc.sample_serving_distance(params, replace(drop, scenario="homogeneous"), workers)
    samples = samples[np.isfinite(samples)]
    ks = stats.kstest(samples, dist.cdf).statistic
    mean = dist.mean()
    rel = abs(samples.mean() - mean) / mean
    mass = dist.total_mass() + dist.ccdf(dist.upper_radius(dist.tail_mass))
    return [
        _cap_row("ks_distance", ks, 0.01),
        _cap_row("mean_relative_error", rel, 0.01),
        _row("pdf_total_mass", 1.0, mass, 0.0, 1e-4),
    ]


def suite_theorem1(params: NetworkParams, drop: mc.DropConfig, workers: int = 1,
                   tol: float = 0.02) -> list[CheckRow]:
    """Single-tier coverage on the fading x blockage x threshold grid."""
    rows = []
    drop = replace(drop, scenario="homogeneous")
    for tag, p in _variants(params):
        theta = reference_tilt(p)
        sinr = mc.homogeneous_sinr(p, drop, theta, workers)
        for g_db in GAMMA_GRID_DB:
            g = float(db_to_linear(g_db))
            est = mc.EmpiricalEstimate.from_indicator(sinr > g)
            exact = cov.coverage_homogeneous(p, g, theta).value
            rows.append(_row(f"coverage {tag} gamma_db={g_db:g}", exact, est.mean,
                             est.ci95_halfwidth, tol))
    return rows


def suite_theorem23(params: NetworkParams, drop: mc.DropConfig, workers: int = 1,
                    tol: float = 0.03) -> list[CheckRow]:
    """Two-tier coverage (macro and femto user) at three sleep radii.

    Also reports the gap between the exact hole process and independent
    thinning as informational rows.
    """
    if params.lambda_f <= 0:
        params = replace(params, lambda_f=HETNET_DENSITY_RATIO * params.lambda_m)
    rows = []
    drop = replace(drop, scenario="hetnet")
    for tag, p in _variants(params):
        theta = reference_tilt(p)
        r_c = np.array(RC_FRACTIONS) * p.r_c_max
        exact_m, exact_f = mc.hetnet_sinr(p, replace(drop, exact_hole_process=True), theta, r_c,
                                          workers)
        thin_m, thin_f = mc.hetnet_sinr(p, replace(drop, exact_hole_process=False), theta, r_c,
                                        workers)
        for g_db in GAMMA_GRID_DB:
            g = float(db_to_linear(g_db))
            an_m = cov.macro_hetnet_profile(p, g, theta, r_c)
            an_f = cov.femto_profile(p, g, theta, r_c)
            for j, rc in enumerate(r_c):
                where = f"{tag} gamma_db={g_db:g} r_c={rc:.2f}"
                em = mc.EmpiricalEstimate.from_indicator(exact_m[j] > g)
                ef = mc.EmpiricalEstimate.from_indicator(exact_f[j] > g)
                rows.append(_row(f"macro {where}", an_m[j], em.mean, em.ci95_halfwidth, tol))
                rows.append(_row(f"femto {where}", an_f[j], ef.mean, ef.ci95_halfwidth, tol))
                rows.append(_row(f"thinning_gap_macro {where}", em.mean,
                                 float((thin_m[j] > g).mean()), 0.0, math.nan))
                rows.append(_row(f"thinning_gap_femto {where}", ef.mean,
                                 float((thin_f[j] > g).mean()), 0.0, math.nan))
    return rows


def suite_bounds(params: NetworkParams, drop: mc.DropConfig | None = None, workers: int = 1,
                 n_grid: int = 16) -> list[CheckRow]:
    """Noise-free femto lower bound never exceeds the exact femto coverage.

    ``analytic`` is the exact coverage and ``empirical`` the bound; the row
    passes when ``bound <= exact`` up to rounding.
    """
    if params.lambda_f <= 0:
        params = replace(params, lambda_f=HETNET_DENSITY_RATIO * params.lambda_m)
    rows = []
    for tag, p in _variants(replace(params, sigma2=0.0)):
        theta = reference_tilt(p)
        r_c = np.linspace(0.0, p.r_c_max, n_grid)
        for g_db in GAMMA_GRID_DB:
            g = float(db_to_linear(g_db))
            exact = cov.femto_profile(p, g, theta, r_c)
            bound = cov.femto_lower_bound_profile(p, g, r_c)
            for j, rc in enumerate(r_c):
                ok = bool(bound[j] <= exact[j] * (1.0 + 1e-9) + 1e-15)
                rows.append(CheckRow(f"femto_bound {tag} gamma_db={g_db:g} r_c={rc:.2f}",
                                     float(exact[j]), float(bound[j]), 0.0, 0.0, ok))
    return rows


SUITES: dict[str, Callable[..., list[CheckRow]]] = {
    "lemma1": suite_lemma1,
    "theorem1": suite_theorem1,
    "theorem23": suite_theorem23,
    "bounds": suite_bounds,
}


def run_suite(name: str, params: NetworkParams, drop: mc.DropConfig,
              workers: int = 1) -> list[CheckRow]:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(params, drop, workers)
