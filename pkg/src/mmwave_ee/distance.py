"""Serving-distance law under max-average-power association with blockage.

NLOS base stations are mapped to LOS-equivalent distances, after which the
serving BS is simply the nearest point.  The serving distance ``R`` is
measured in that LOS-equivalent coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import PathLossModel
from .quadrature import finite_rule, power_substitution_rule

_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 18


@dataclass(frozen=True)
class EquivalentDistanceMap:
    """``R_eq^{-1}(r) = mu r^kappa``: the NLOS radius that matches a LOS radius r."""

    mu: float
    kappa: float

    @classmethod
    def from_model(cls, model: PathLossModel) -> "EquivalentDistanceMap":
        return cls(
            mu=(model.c_nlos / model.c_los) ** (1.0 / model.alpha_nlos),
            kappa=model.alpha_los / model.alpha_nlos,
        )


def r_eq(r, dmap: EquivalentDistanceMap):
    """LOS-equivalent distance of an NLOS BS at physical distance ``r``."""
    r = np.asarray(r, dtype=float)
    out = (r / dmap.mu) ** (1.0 / dmap.kappa)
    return out if out.ndim else float(out)


def r_eq_inv(r, dmap: EquivalentDistanceMap):
    r = np.asarray(r, dtype=float)
    out = dmap.mu * r**dmap.kappa
    return out if out.ndim else float(out)


def _series(y, coef):
    total = np.zeros_like(y)
    term = np.ones_like(y)
    for k in range(_SERIES_TERMS + 3):
        if k >= 2:
            total = total + coef(k) * term
        term = term * y / (k + 1)
    return total


def los_mass(y):
    """``1 - (1 + y) e^{-y}``, accurate for small y."""
    y = np.asarray(y, dtype=float)
    small = y < _SERIES_CUTOFF
    direct = -np.expm1(-y) - y * np.exp(-y)
    series = _series(np.where(small, y, 0.0), lambda k: (-1) ** k * (k - 1))
    return np.where(small, series, direct)


def nlos_mass(y):
    """``y^2/2 + (1 + y) e^{-y} - 1``, accurate for small y."""
    y = np.asarray(y, dtype=float)
    small = y < _SERIES_CUTOFF
    direct = 0.5 * y * y - los_mass(y)
    series = _series(np.where(small, y, 0.0), lambda k: 0.0 if k < 3 else (-1) ** (k + 1) * (k - 1))
    return np.where(small, series, direct)


@dataclass(frozen=True)
class ServingDistanceDist:
    """CCDF, PDF, quantiles and moments of the serving distance.

    The outer quadrature rule (nodes and PDF-weighted weights) is built once
    at construction and reused by every coverage integral.
    """

    path_loss: PathLossModel
    lambda_m: float
    tail_mass: float = 1e-7
    _rule: tuple[np.ndarray, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.lambda_m <= 0:
            raise ValueError("lambda_m must be positive")
        nodes, weights = self.quadrature_rule()
        object.__setattr__(self, "_rule", (nodes, weights * self.pdf(nodes)))

    @property
    def dmap(self) -> EquivalentDistanceMap:
        return EquivalentDistanceMap.from_model(self.path_loss)

    def _log_ccdf(self, r):
        beta = self.path_loss.beta_blockage
        scale = 2.0 * math.pi * self.lambda_m / beta**2
        rn = r_eq_inv(r, self.dmap)
        return -scale * (los_mass(beta * r) + nlos_mass(beta * rn))

    def ccdf(self, r):
        """``Pr{R > r}``: void probability of both LOS and NLOS tiers."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("distance must be nonnegative")
        out = np.exp(self._log_ccdf(r))
        return out if out.ndim else float(out)

    def cdf(self, r):
        return 1.0 - self.ccdf(r)

    def pdf(self, r):
        """Density ``-d/dr ccdf(r)``."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("pdf is defined for r > 0")
        beta = self.path_loss.beta_blockage
        d = self.dmap
        rn = d.mu * r**d.kappa
        hazard = 2.0 * math.pi * self.lambda_m * (
            r * np.exp(-beta * r)
            + d.mu**2 * d.kappa * r ** (2.0 * d.kappa - 1.0) * -np.expm1(-beta * rn)
        )
        out = hazard * np.exp(self._log_ccdf(r))
        return out if out.ndim else float(out)

    def upper_radius(self, mass: float) -> float:
        """Smallest radius on a doubling ladder with ``ccdf < mass``."""
        r = 1.0
        while self.ccdf(r) >= mass:
            r *= 2.0
        return r

    def inverse_ccdf(self, p: float, tol: float = 1e-6) -> float:
        """Radius with ``ccdf(r) = p``, by bisection."""
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        hi = 1.0
        while self.ccdf(hi) > p:
            hi *= 2.0
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.ccdf(mid) > p:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def quantile_bounds(self, epsilon: float) -> tuple[float, float]:
        """Radii ``(rho0, rho1)`` with ``Pr{rho0 <= R <= rho1} >= 1 - epsilon``."""
        if not 0.0 < epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        return self.inverse_ccdf(1.0 - epsilon / 2.0), self.inverse_ccdf(epsilon / 2.0)

    def quadrature_rule(self, breaks=()) -> tuple[np.ndarray, np.ndarray]:
        """Plain (unweighted) nodes and weights covering the support of R.

        ``[0, 1 m]`` uses a power substitution for the ``r^(2 kappa - 1)``
        factor; the rest is geometric panels up to the ``tail_mass`` radius.
        """
        knot = 1.0
        r_hi = max(self.upper_radius(self.tail_mass), 2.0 * knot)
        x0, w0 = power_substitution_rule(knot)
        x1, w1 = finite_rule(knot, r_hi, breaks)
        return np.concatenate([x0, x1]), np.concatenate([w0, w1])

    def expect(self, func, breaks=()) -> float:
        """``E[func(R)]`` on the outer rule, with extra breakpoints if given."""
        if breaks:
            nodes, weights = self.quadrature_rule(breaks)
            weights = weights * self.pdf(nodes)
        else:
            nodes, weights = self._rule
        return float(np.dot(weights, func(nodes)))

    def weighted_rule(self, breaks=()) -> tuple[np.ndarray, np.ndarray]:
        if not breaks:
            return self._rule
        nodes, weights = self.quadrature_rule(breaks)
        return nodes, weights * self.pdf(nodes)

    def total_mass(self) -> float:
        return self.expect(np.ones_like)

    def mean(self) -> float:
        """``E[R]`` by quadrature of ``r f_R(r)``."""
        return self.expect(lambda r: r)


def mean_serving_distance(path_loss: PathLossModel, lambda_m: float) -> float:
    return ServingDistanceDist(path_loss, lambda_m).mean()


def quantile_bounds(path_loss: PathLossModel, lambda_m: float, epsilon: float):
    return ServingDistanceDist(path_loss, lambda_m).quantile_bounds(epsilon)


def femto_distance_pdf(rho, r_f: float):
    """Density ``2 rho / r_f^2`` of a user uniform in a disc of radius ``r_f``; zero outside."""
    rho = np.asarray(rho, dtype=float)
    out = np.where((rho >= 0) & (rho <= r_f), 2.0 * rho / r_f**2, 0.0)
    return out if out.ndim else float(out)


def femto_mean_distance(r_f: float) -> float:
    return 2.0 * r_f / 3.0
