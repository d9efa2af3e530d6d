"""Independent reference computations shared by the tests."""
import math

import numpy as np
from scipy import integrate

from mmwave_ee.laplace import InterferenceTier, LaplaceExponent, laplace_value
from mmwave_ee.model import vertical_gain


def fornberg_weights(x0: float, nodes, order: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..order at ``x0`` on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def scaled_fd_derivatives(f, z: float, order: int, h: float = 0.02, half_width: int = 7):
    """``z^l f^(l)(z)`` for l = 0..order from a centered stencil in ``t = z'/z - 1``."""
    t = h * np.arange(-half_width, half_width + 1)
    values = np.array([f(z * (1.0 + ti)) for ti in t])
    w = fornberg_weights(0.0, t, order)
    return values @ w


def tier_exponent_by_quad(tier: InterferenceTier, z: float, theta_tilt: float = 0.0) -> float:
    """Log-Laplace transform of one tier by adaptive quadrature of the PGFL integrand."""
    m = tier.fading_m

    def vis(x):
        if tier.visibility == "los":
            return math.exp(-tier.beta * x)
        if tier.visibility == "nlos":
            return -math.expm1(-tier.beta * x)
        return 1.0

    total = 0.0
    breaks = tier.pattern.kink_radii(theta_tilt) if tier.pattern else []
    for d, p in zip(tier.gain.values, tier.gain.probs):
        if p == 0:
            continue

        def integrand(x):
            g = float(vertical_gain(x, theta_tilt, tier.pattern)) if tier.pattern else 1.0
            u = z * tier.tx_power * tier.c_ref * d * g / (m * x**tier.alpha)
            return -math.expm1(-m * math.log1p(u)) * x * vis(x)

        pts = sorted({tier.lower, *[b for b in breaks if b > tier.lower]})
        pts.append(max(pts[-1] * 4, 1e3))
        val = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            val += integrate.quad(integrand, a, b, limit=200, epsabs=0, epsrel=1e-11)[0]
        val += integrate.quad(integrand, pts[-1], np.inf, limit=200, epsabs=0, epsrel=1e-11)[0]
        total += 2 * math.pi * tier.density * p * val
    return -total


def laplace_by_quad(exponent: LaplaceExponent, z: float, theta_tilt: float = 0.0) -> float:
    return math.exp(sum(tier_exponent_by_quad(t, z, theta_tilt) for t in exponent.tiers))


def laplace_fd_scaled(exponent: LaplaceExponent, z: float, order: int, theta_tilt: float = 0.0):
    return scaled_fd_derivatives(lambda x: laplace_value(exponent, x, theta_tilt), z, order)
