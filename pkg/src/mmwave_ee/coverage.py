"""SINR coverage of the typical macro and femto user.

Exact forms integrate the conditional coverage against the serving-distance
law; the ``*_approx`` forms evaluate it once at the mean serving distance.
HetNet routines accept an array of sleep radii so that sweeps over ``r_c``
reuse the tilt-dependent MBS interference, which does not depend on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc

from .distance import ServingDistanceDist, femto_mean_distance, r_eq_inv
from .laplace import (
    InterferenceTier,
    closed_form_constant,
    laplace_scaled_from_exponent,
    nakagami_conditional_coverage,
    tier_scaled_derivatives,
)
from .model import NetworkParams, PathLossModel, vertical_gain
from .quadrature import panel_rule

Method = Literal["exact-analytic", "taylor-approx", "lower-bound", "monte-carlo"]


@dataclass(frozen=True)
class CoverageResult:
    value: float
    method: Method
    ci_halfwidth: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.value <= 1.0 + 1e-12:
            raise ValueError(f"coverage {self.value} outside [0, 1]")


@lru_cache(maxsize=64)
def serving_distance(path_loss: PathLossModel, lambda_m: float) -> ServingDistanceDist:
    return ServingDistanceDist(path_loss, lambda_m)


def mean_serving_distance(params: NetworkParams) -> float:
    return serving_distance(params.path_loss, params.lambda_m).mean()


# -- interference tiers ---------------------------------------------------


def mbs_tiers_at_macro(params: NetworkParams) -> tuple[InterferenceTier, InterferenceTier]:
    """LOS and NLOS MBS interference toward a macro user (lower limits set per call)."""
    pl = params.path_loss
    common = dict(
        density=params.lambda_m,
        tx_power=params.p_m,
        gain=params.macro_gain,
        beta=pl.beta_blockage,
        fading_m=params.m,
        pattern=params.vertical,
    )
    los = InterferenceTier(c_ref=pl.c_los, alpha=pl.alpha_los, visibility="los", **common)
    nlos = InterferenceTier(c_ref=pl.c_nlos, alpha=pl.alpha_nlos, visibility="nlos", **common)
    return los, nlos


def fbs_tier_at_macro(params: NetworkParams, density: float = 1.0) -> InterferenceTier:
    """Active FBSs seen by a macro user: NLOS through one wall, Rayleigh."""
    return InterferenceTier(
        density=density,
        tx_power=params.p_f * params.ell_w,
        c_ref=params.path_loss.c_nlos,
        alpha=params.path_loss.alpha_nlos,
        gain=params.cross_fm_gain,
    )


def mbs_tier_at_femto(params: NetworkParams) -> InterferenceTier:
    """MBSs seen by an indoor femto user: NLOS through one wall, Rayleigh, tilted."""
    return InterferenceTier(
        density=params.lambda_m,
        tx_power=params.p_m * params.ell_w,
        c_ref=params.path_loss.c_nlos,
        alpha=params.path_loss.alpha_nlos,
        gain=params.cross_mf_gain,
        pattern=params.vertical,
    )


def fbs_tier_at_femto(params: NetworkParams, density: float = 1.0) -> InterferenceTier:
    """Other active FBSs seen by a femto user: NLOS through two walls, Rayleigh."""
    return InterferenceTier(
        density=density,
        tx_power=params.p_f * params.ell_w**2,
        c_ref=params.path_loss.c_nlos,
        alpha=params.path_loss.alpha_nlos,
        gain=params.femto_gain,
    )


# -- macro user -----------------------------------------------------------


def _macro_z(params: NetworkParams, gamma, theta_tilt, rho):
    pl = params.path_loss
    g0 = vertical_gain(rho, theta_tilt, params.vertical)
    s = gamma * rho**pl.alpha_los / (params.p_m * pl.c_los * params.macro_gain.aligned * g0)
    return params.m * s


def macro_mbs_exponent(params: NetworkParams, gamma, theta_tilt, rho):
    """``z`` and scaled MBS-tier exponent derivatives at serving distances ``rho``."""
    rho = np.asarray(rho, dtype=float)
    z = _macro_z(params, gamma, theta_tilt, rho)
    los, nlos = mbs_tiers_at_macro(params)
    dmap_lower = r_eq_inv(rho, _dmap(params))
    order = params.m - 1
    a = tier_scaled_derivatives(los, z, theta_tilt, order, lowers=rho)
    a = a + tier_scaled_derivatives(nlos, z, theta_tilt, order, lowers=dmap_lower)
    return z, a


def _dmap(params):
    from .distance import EquivalentDistanceMap

    return EquivalentDistanceMap.from_model(params.path_loss)


def _fbs_unit_exponent_at_macro(params: NetworkParams, z):
    """Scaled derivatives of the FBS-tier exponent per unit FBS density."""
    tier = fbs_tier_at_macro(params, 1.0)
    return tier_scaled_derivatives(tier, z, 0.0, params.m - 1)


def _macro_coverage_given(params, z, a_scaled):
    l_scaled = laplace_scaled_from_exponent(a_scaled)
    return nakagami_conditional_coverage(l_scaled, z, params.sigma2, params.m)


def _outer_rule(params: NetworkParams, theta_tilt):
    dist = serving_distance(params.path_loss, params.lambda_m)
    breaks = ()
    if params.vertical is not None:
        breaks = tuple(params.vertical.lobe_radii(float(np.real(theta_tilt))))
    return dist.weighted_rule(breaks)


def _check_gamma(gamma):
    if not np.all(np.asarray(gamma) > 0):
        raise ValueError("SINR threshold must be positive (linear)")


def _check_tilt(theta_tilt):
    if not 0.0 <= np.real(theta_tilt) <= 90.0:
        raise ValueError(f"tilt must lie in [0, 90] degrees, got {theta_tilt}")


def _check_rc(params: NetworkParams, r_c):
    r_c = np.atleast_1d(np.asarray(r_c, dtype=float))
    if np.any(r_c < 0) or np.any(r_c > params.r_c_max * (1 + 1e-12)):
        raise ValueError(f"sleep radius must lie in [0, {params.r_c_max:.6g}] m")
    return r_c


def coverage_homogeneous(params: NetworkParams, gamma: float, theta_tilt: float) -> CoverageResult:
    """Coverage of the typical user with MBSs only, integrated over the serving distance."""
    _check_gamma(gamma)
    _check_tilt(theta_tilt)
    nodes, weights = _outer_rule(params, theta_tilt)
    z, a = macro_mbs_exponent(params, gamma, theta_tilt, nodes)
    cond = _macro_coverage_given(params, z, a)
    return CoverageResult(float(np.clip(np.dot(weights, cond), 0.0, 1.0)), "exact-analytic")


def macro_hetnet_profile(params: NetworkParams, gamma_m, theta_tilt, r_c_values) -> np.ndarray:
    """Exact macro-user coverage for each sleep radius in ``r_c_values``."""
    r_c = _check_rc(params, r_c_values)
    nodes, weights = _outer_rule(params, theta_tilt)
    z, a_mbs = macro_mbs_exponent(params, gamma_m, theta_tilt, nodes)
    a_fbs = _fbs_unit_exponent_at_macro(params, z)
    dens = params.lambda_f_active(r_c)
    a = a_mbs[None, ...] + dens[:, None, None] * a_fbs[None, ...]
    cond = _macro_coverage_given(params, z[None, :], a)
    return np.clip(cond @ weights, 0.0, 1.0)


def coverage_macro_hetnet(params: NetworkParams, gamma_m, theta_tilt, r_c) -> CoverageResult:
    """Macro-user coverage with FBS interference thinned by sleep regions of radius ``r_c``."""
    _check_gamma(gamma_m)
    _check_tilt(theta_tilt)
    value = macro_hetnet_profile(params, gamma_m, theta_tilt, [r_c])[0]
    return CoverageResult(float(value), "exact-analytic")


# -- femto user -----------------------------------------------------------


def _femto_z(params: NetworkParams, gamma_f, rho):
    pl = params.path_loss
    return gamma_f * np.asarray(rho) ** pl.alpha_los / (
        params.p_f * pl.c_los * params.femto_gain.aligned
    )


def _femto_rule(r_f: float):
    nodes, weights = panel_rule([0.0, r_f / 8, r_f / 4, r_f / 2, r_f])
    return nodes, weights * 2.0 * nodes / r_f**2


def _femto_conditional_log(params, gamma_f, theta_tilt, rho, dens):
    """log of the conditional femto coverage, shape (len(dens), len(rho))."""
    z = _femto_z(params, gamma_f, rho)
    a_m = tier_scaled_derivatives(mbs_tier_at_femto(params), z, theta_tilt, 0)[..., 0]
    a_f = tier_scaled_derivatives(fbs_tier_at_femto(params, 1.0), z, 0.0, 0, lowers=rho)[..., 0]
    return -z * params.sigma2 + a_m + np.multiply.outer(dens, a_f)


def femto_profile(params: NetworkParams, gamma_f, theta_tilt, r_c_values) -> np.ndarray:
    """Exact femto-user coverage for each sleep radius (prefactor included)."""
    r_c = _check_rc(params, r_c_values)
    nodes, weights = _femto_rule(params.r_f)
    dens = params.lambda_f_active(r_c)
    cond = np.exp(_femto_conditional_log(params, gamma_f, theta_tilt, nodes, dens)) @ weights
    active = np.exp(-math.pi * params.lambda_m * r_c**2)
    return np.clip(active * cond, 0.0, 1.0)


def coverage_femto(params: NetworkParams, gamma_f, theta_tilt, r_c) -> CoverageResult:
    """Femto-user coverage: serving FBS awake and SINR above ``gamma_f``."""
    _check_gamma(gamma_f)
    _check_tilt(theta_tilt)
    return CoverageResult(float(femto_profile(params, gamma_f, theta_tilt, [r_c])[0]),
                          "exact-analytic")


def _fractional_gain_moment(dist, alpha_n):
    return dist.moment(2.0 / alpha_n)


def femto_lower_bound_profile(params: NetworkParams, gamma_f, r_c_values) -> np.ndarray:
    """Interference-limited closed-form lower bound on femto coverage."""
    r_c = _check_rc(params, r_c_values)
    pl = params.path_loss
    an, al = pl.alpha_nlos, pl.alpha_los
    delta = 2.0 / an
    shape = math.pi / (an * math.sin(2.0 * math.pi / an))
    d0f = params.femto_gain.aligned
    g_max = 1.0
    c1 = (
        2.0 * math.pi * params.lambda_m
        * (gamma_f * params.p_m * params.ell_w * pl.c_nlos * g_max / (params.p_f * pl.c_los * d0f))
        ** delta
        * shape
        * _fractional_gain_moment(params.cross_mf_gain, an)
    )
    c2 = (
        2.0 * math.pi * params.lambda_f_active(r_c)
        * (gamma_f * params.ell_w**2 * pl.c_nlos / (pl.c_los * d0f)) ** delta
        * shape
        * _fractional_gain_moment(params.femto_gain, an)
    )
    k = c1 + c2
    a = an / al
    x = k * params.r_f ** (2.0 * al / an)
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = np.where(
            k > 0,
            a / (params.r_f**2 * k**a) * gammainc(a, x) * gamma_fn(a),
            1.0,
        )
    return np.clip(c0 * np.exp(-math.pi * params.lambda_m * r_c**2), 0.0, 1.0)


def coverage_femto_lower_bound(params: NetworkParams, gamma_f, r_c) -> CoverageResult:
    _check_gamma(gamma_f)
    return CoverageResult(float(femto_lower_bound_profile(params, gamma_f, [r_c])[0]),
                          "lower-bound")


# -- single-point approximations -------------------------------------------


def macro_conditional_coverage(params: NetworkParams, gamma, theta_tilt, rho, fbs_density=0.0):
    """Macro coverage conditioned on the serving distance ``rho`` (array ok)."""
    z, a = macro_mbs_exponent(params, gamma, theta_tilt, rho)
    if np.any(np.asarray(fbs_density) > 0):
        a = a + np.asarray(fbs_density) * _fbs_unit_exponent_at_macro(params, z)
    return _macro_coverage_given(params, z, a)


def coverage_homogeneous_approx(params: NetworkParams, gamma, theta_tilt) -> CoverageResult:
    """Coverage with the serving distance frozen at its mean."""
    _check_gamma(gamma)
    _check_tilt(theta_tilt)
    rho_bar = mean_serving_distance(params)
    value = macro_conditional_coverage(params, gamma, theta_tilt, np.asarray(rho_bar))
    return CoverageResult(float(np.clip(np.real(value), 0.0, 1.0)), "taylor-approx")


def macro_hetnet_approx_profile(params: NetworkParams, gamma_m, theta_tilt, r_c_values):
    r_c = _check_rc(params, r_c_values)
    rho_bar = np.asarray(mean_serving_distance(params))
    z, a_mbs = macro_mbs_exponent(params, gamma_m, theta_tilt, rho_bar)
    a_fbs = _fbs_unit_exponent_at_macro(params, z)
    dens = params.lambda_f_active(r_c)
    a = a_mbs[None, :] + dens[:, None] * a_fbs[None, :]
    return _macro_coverage_given(params, z, a)


def femto_approx_profile(params: NetworkParams, gamma_f, theta_tilt, r_c_values):
    """Femto coverage with the femto link length frozen at its mean 2 R_f / 3."""
    r_c = _check_rc(params, r_c_values)
    g_bar = np.asarray(femto_mean_distance(params.r_f))
    dens = params.lambda_f_active(r_c)
    cond = np.exp(_femto_conditional_log(params, gamma_f, theta_tilt, g_bar[None], dens))[:, 0]
    return np.exp(-math.pi * params.lambda_m * r_c**2) * cond


def coverage_hetnet_approx(
    params: NetworkParams, gamma_m, gamma_f, theta_tilt, r_c
) -> tuple[CoverageResult, CoverageResult]:
    _check_gamma(gamma_m)
    _check_gamma(gamma_f)
    _check_tilt(theta_tilt)
    macro = macro_hetnet_approx_profile(params, gamma_m, theta_tilt, [r_c])[0]
    femto = femto_approx_profile(params, gamma_f, theta_tilt, [r_c])[0]
    clip = lambda v: float(np.clip(np.real(v), 0.0, 1.0))  # noqa: E731
    return CoverageResult(clip(macro), "taylor-approx"), CoverageResult(clip(femto), "taylor-approx")


def fbs_closed_form_constant(params: NetworkParams) -> float:
    """Per-unit-density constant of the FBS-to-macro exponent ``-K lambda z^(2/alpha_N)``."""
    return closed_form_constant(fbs_tier_at_macro(params, 1.0))
