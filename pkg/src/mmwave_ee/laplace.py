"""Laplace transforms of aggregate PPP interference and their z-derivatives.

An interference tier is a PPP of transmitters seen through one path-loss
branch.  Its log-Laplace transform ("exponent") is::

    A(z) = -sum_i 2 pi lambda p_i  int_lower^inf F(z, x, d_i) x V(x) dx
    F    = 1 - (1 + z P C d_i G(x) / (m x^alpha))^-m

with V the LOS/NLOS visibility weight and G the elevation gain.  Everything
here works with *scaled* derivatives ``z^n A^(n)(z)`` and
``z^n L^(n)(z)``; they stay O(1) even when z is astronomically large (z
carries the inverse of the ~1e-6 reference path gain).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np
from scipy.special import binom, gammaln

from . import kernels
from .model import HorizontalGainDist, VerticalPattern, vertical_gain
from .quadrature import pad_rules, semi_infinite_rule

Visibility = Literal["los", "nlos", "always"]
MAX_ORDER = 9


class QuadratureError(ArithmeticError):
    """Interference integral failed its refinement check or produced non-finite values."""


class UnsupportedOrderError(ValueError):
    pass


@dataclass(frozen=True)
class InterferenceTier:
    """One PPP of interferers and the link model toward the typical user.

    ``tx_power`` already includes wall attenuation.  ``visibility`` selects
    the thinning weight: ``los`` -> exp(-beta x), ``nlos`` -> 1 - exp(-beta x),
    ``always`` -> 1 (links that are NLOS by assumption).  ``pattern`` is the
    elevation pattern applied at the interferer (``None`` -> gain 1).
    """

    density: float
    tx_power: float
    c_ref: float
    alpha: float
    gain: HorizontalGainDist
    visibility: Visibility = "always"
    beta: float = 0.0
    lower: float = 0.0
    fading_m: int = 1
    pattern: VerticalPattern | None = None

    @property
    def has_closed_form(self) -> bool:
        return self.lower == 0.0 and self.visibility == "always" and self.pattern is None

    def with_lower(self, lower: float) -> "InterferenceTier":
        return replace(self, lower=float(lower))


@dataclass(frozen=True)
class LaplaceExponent:
    """Product of independent tiers: the exponent is the sum of tier exponents."""

    tiers: tuple[InterferenceTier, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))


def closed_form_constant(tier: InterferenceTier) -> float:
    """K in ``A(z) = -K z^delta`` for an unshadowed, untilted tier from radius 0.

    Uses ``2 pi int_0^inf x (1 - E exp(-s h x^-alpha)) dx
    = pi s^delta E[h^delta] Gamma(1 - delta)`` with h ~ Gamma(m, 1/m).
    """
    delta = 2.0 / tier.alpha
    m = tier.fading_m
    log_fade = gammaln(m + delta) - gammaln(m) - delta * math.log(m)
    const = math.pi * math.exp(gammaln(1.0 - delta) + log_fade)
    d = np.asarray(tier.gain.values)
    p = np.asarray(tier.gain.probs)
    return float(tier.density * const * np.sum(p * (tier.tx_power * tier.c_ref * d) ** delta))


def _closed_form_scaled(tier: InterferenceTier, z, order: int):
    z = np.asarray(z)
    delta = 2.0 / tier.alpha
    base = -closed_form_constant(tier) * z**delta
    out = np.empty(z.shape + (order + 1,), dtype=np.result_type(z, float))
    falling = 1.0
    for n in range(order + 1):
        out[..., n] = falling * base
        falling *= delta - n
    return out


def _visibility(tier: InterferenceTier, x):
    if tier.visibility == "los":
        return np.exp(-tier.beta * x)
    if tier.visibility == "nlos":
        return -np.expm1(-tier.beta * x)
    return np.ones_like(x)


def _tier_rules(tier: InterferenceTier, z, lowers, theta_tilt, refine: bool = False):
    """Per-row quadrature rules, padded to a common width."""
    breaks = tier.pattern.lobe_radii(float(np.real(theta_tilt))) if tier.pattern else []
    live = [v for v, p in zip(tier.gain.values, tier.gain.probs) if p > 0]
    dmin, dmax = min(live), max(live)
    if tier.pattern is not None:
        dmin *= 10.0 ** (-tier.pattern.sll_db / 10.0)
    far = 10.0 / tier.beta if tier.visibility != "always" and tier.beta > 0 else 0.0
    ratio, tail_factor = (1.2, 2.0) if refine else (1.5, 1.0)
    rules = []
    for zi, lo in zip(np.abs(np.real(z)).ravel(), np.ravel(lowers)):
        # radii where the kernel argument crosses one, for the weakest and strongest link
        base = zi * tier.tx_power * tier.c_ref / tier.fading_m
        s_lo = (base * dmin) ** (1.0 / tier.alpha)
        s_hi = (base * dmax) ** (1.0 / tier.alpha)
        scale = s_lo if s_lo > 0 and math.isfinite(s_lo) else None
        far_i = max(far, 4.0 * s_hi) if math.isfinite(s_hi) else far
        rules.append(semi_infinite_rule(lo, breaks, scale=scale, far=far_i or None,
                                        ratio=ratio, tail_factor=tail_factor))
    return pad_rules(rules)


def tier_scaled_derivatives(
    tier: InterferenceTier,
    z,
    theta_tilt: float = 0.0,
    order: int = 0,
    lowers=None,
    *,
    refine: bool = False,
    force_quadrature: bool = False,
    backend: str | None = None,
) -> np.ndarray:
    """Scaled exponent derivatives ``z^n A^(n)(z)`` for n = 0..order.

    Parameters
    ----------
    z : array_like
        Laplace arguments, > 0.  May be complex for complex-step use.
    lowers : array_like, optional
        Per-z lower limits overriding ``tier.lower``.

    Returns
    -------
    ndarray, shape ``z.shape + (order + 1,)``
    """
    z = np.asarray(z)
    if tier.density == 0.0:
        return np.zeros(z.shape + (order + 1,), dtype=np.result_type(z, float))
    if lowers is None:
        lowers = np.full(z.shape, tier.lower)
    lowers = np.broadcast_to(np.asarray(lowers, dtype=float), z.shape)
    if tier.has_closed_form and not force_quadrature and np.all(lowers == 0.0):
        return _closed_form_scaled(tier, z, order)

    x, w = _tier_rules(tier, z, lowers, theta_tilt, refine)
    zf = z.reshape(-1, 1, 1)
    g = vertical_gain(x, theta_tilt, tier.pattern) if tier.pattern is not None else 1.0
    d = np.asarray(tier.gain.values)[None, :, None]
    p = np.asarray(tier.gain.probs)[None, :, None]
    x3 = x[:, None, :]
    c = tier.tx_power * tier.c_ref * d * (g[:, None, :] if np.ndim(g) else g) / (
        tier.fading_m * x3**tier.alpha
    )
    u = zf * c
    weights = 2.0 * math.pi * tier.density * p * (w * x * _visibility(tier, x))[:, None, :]
    weights = np.broadcast_to(weights, u.shape)
    s = kernels.scaled_moments(u, weights, tier.fading_m, order, backend=backend)
    s = s.sum(axis=1)  # over gain values
    if not np.all(np.isfinite(s)):
        raise QuadratureError(
            f"non-finite interference moments for tier {tier} at z={z.ravel()[:3]}..."
        )
    m = tier.fading_m
    rising = np.ones(order + 1)
    for n in range(1, order + 1):
        rising[n] = rising[n - 1] * (m + n - 1)
    signs = (-1.0) ** np.arange(order + 1)
    scaled = s * signs * rising
    scaled[:, 0] = -s[:, 0]
    return scaled.reshape(z.shape + (order + 1,))


def exponent_scaled(exponent: LaplaceExponent, z, theta_tilt=0.0, order=0, **kw):
    z = np.asarray(z)
    total = np.zeros(z.shape + (order + 1,), dtype=np.result_type(z, float))
    for tier in exponent.tiers:
        total = total + tier_scaled_derivatives(tier, z, theta_tilt, order, **kw)
    return total


def laplace_scaled_from_exponent(a_scaled) -> np.ndarray:
    """``z^l L^(l)`` from ``z^n A^(n)`` via the exp-of-exponent recursion.

    ``L^(l) = sum_{j<l} C(l-1, j) A^(j+1) L^(l-1-j)``; the powers of z
    distribute exactly so the same recursion holds for scaled quantities.
    """
    a_scaled = np.asarray(a_scaled)
    order = a_scaled.shape[-1] - 1
    out = np.empty_like(a_scaled)
    out[..., 0] = np.exp(a_scaled[..., 0])
    for ell in range(1, order + 1):
        acc = 0.0
        for j in range(ell):
            acc = acc + binom(ell - 1, j) * a_scaled[..., j + 1] * out[..., ell - 1 - j]
        out[..., ell] = acc
    return out


def _check_order(max_order: int):
    if max_order < 0 or max_order > MAX_ORDER:
        raise UnsupportedOrderError(f"derivative order must lie in [0, {MAX_ORDER}]")


def _verified_scaled(exponent, z, theta_tilt, order, rtol=1e-7):
    coarse = exponent_scaled(exponent, z, theta_tilt, order)
    fine = exponent_scaled(exponent, z, theta_tilt, order, refine=True)
    scale = np.maximum(np.abs(fine), 1e-300)
    err = np.max(np.abs(coarse - fine) / scale)
    if not err <= rtol:
        raise QuadratureError(
            f"interference quadrature not converged: relative change {err:.3g} "
            f"under refinement (z={z}, tilt={theta_tilt}, order={order})"
        )
    return fine


def laplace_value(exponent: LaplaceExponent, z: float, theta_tilt: float = 0.0) -> float:
    """``E[exp(-z I)]`` for the aggregate interference described by ``exponent``."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    if z == 0:
        return 1.0
    a = _verified_scaled(exponent, np.asarray(float(z)), theta_tilt, 0)
    return float(np.exp(a[0]))


def _unscaled_at_zero(exponent: LaplaceExponent, theta_tilt, order):
    """``A^(n)(0)``: finite only when every tier has a positive lower limit."""
    out = np.zeros(order + 1)
    for tier in exponent.tiers:
        if tier.density == 0.0:
            continue
        if tier.lower <= 0.0:
            raise QuadratureError("derivatives at z = 0 diverge for a tier starting at 0")
        x, w = semi_infinite_rule(tier.lower, tier.pattern.lobe_radii(theta_tilt)
                                  if tier.pattern else ())
        g = vertical_gain(x, theta_tilt, tier.pattern) if tier.pattern else 1.0
        m = tier.fading_m
        for d, p in zip(tier.gain.values, tier.gain.probs):
            c = tier.tx_power * tier.c_ref * d * g / (m * x**tier.alpha)
            wt = 2.0 * math.pi * tier.density * p * w * x * _visibility(tier, x)
            rising = 1.0
            for n in range(1, order + 1):
                rising *= m + n - 1
                out[n] += (-1.0) ** n * rising * np.sum(wt * c**n)
    return out


def laplace_derivatives(
    exponent: LaplaceExponent, z: float, theta_tilt: float = 0.0, max_order: int = 0
) -> list[float]:
    """``[L(z), L'(z), ..., L^(max_order)(z)]`` of the interference Laplace transform."""
    _check_order(max_order)
    if z < 0:
        raise ValueError("z must be nonnegative")
    if z == 0:
        a = _unscaled_at_zero(exponent, theta_tilt, max_order)
        return [float(v) for v in laplace_scaled_from_exponent(a)]
    a = _verified_scaled(exponent, np.asarray(float(z)), theta_tilt, max_order)
    scaled = laplace_scaled_from_exponent(a)
    return [float(scaled[ell] / z**ell) for ell in range(max_order + 1)]


def nakagami_conditional_coverage(l_scaled, z, sigma2, m: int):
    """``Pr{h > s (I + sigma2)}`` for h ~ Gamma(m, 1/m), given ``z = m s``.

    Expanding the Gamma CCDF and ``(I + sigma2)^k`` gives::

        e^{-z sigma2} sum_k sum_l C(k,l)/k! (z sigma2)^(k-l) (-1)^l z^l L^(l)(z)

    with ``l_scaled[..., l] = z^l L^(l)(z)``.
    """
    l_scaled = np.asarray(l_scaled)
    zs = np.asarray(z) * sigma2
    total = 0.0
    fact = 1.0
    for k in range(m):
        if k:
            fact *= k
        inner = 0.0
        for ell in range(k + 1):
            inner = inner + binom(k, ell) * zs ** (k - ell) * (-1.0) ** ell * l_scaled[..., ell]
        total = total + inner / fact
    return np.exp(-zs) * total


def product_exponent(tiers: Sequence[InterferenceTier]) -> LaplaceExponent:
    return LaplaceExponent(tuple(tiers))
