"""Fixed composite Gauss-Legendre rules on geometric panels.

Every rule here has nodes that depend only on the integration limits and
breakpoints, never on the integrand.  The interference integrals are therefore
smooth functions of the Laplace variable and of the tilt, which is what lets
finite-difference and complex-step checks agree with the analytic derivative
recursion to near machine precision.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

PANEL_POINTS = 10
TAIL_POINTS = 20
PANEL_RATIO = 1.5


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges, n: int = PANEL_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on consecutive panels ``edges[i]..edges[i+1]``."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.empty(0), np.empty(0)
    xi, wi = _gauss_legendre(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights


def geometric_edges(knots, ratio: float = PANEL_RATIO) -> np.ndarray:
    """Refine sorted positive knots so that no panel spans more than ``ratio``."""
    knots = sorted(set(float(k) for k in knots))
    if not knots:
        return np.empty(0)
    if knots[0] <= 0:
        raise ValueError("geometric refinement needs positive knots")
    out = [knots[0]]
    log_ratio = math.log(ratio)
    for a, b in zip(knots[:-1], knots[1:]):
        span = math.log(b / a)
        n = max(int(math.ceil(span / log_ratio - 1e-9)), 1)
        out.extend(a * math.exp(span * k / n) for k in range(1, n))
        out.append(b)
    return np.asarray(out)


def tail_rule(start: float, n: int = TAIL_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Rule for ``[start, inf)`` through ``x = start / t**2``.

    Power-law tails ``x^(1-alpha)`` become polynomials in t for alpha in
    {2.5, 3, 4, ...}, so a modest fixed order is enough.
    """
    xi, wi = _gauss_legendre(n)
    t = 0.5 * (xi + 1.0)
    wt = 0.5 * wi
    nodes = start / t**2
    weights = wt * 2.0 * start / t**3
    return nodes, weights


def semi_infinite_rule(
    lower: float,
    breaks=(),
    scale: float | None = None,
    far: float | None = None,
    ratio: float = PANEL_RATIO,
    tail_factor: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals over ``[lower, inf)``.

    Parameters
    ----------
    lower : float
        Lower limit, >= 0.
    breaks : iterable of float
        Points where the integrand has kinks or fast variation.
    scale : float, optional
        Characteristic radius of the integrand (where the interference
        kernel crosses order one).  Keeps the first panel below it when
        ``lower == 0`` and pushes the tail start beyond it.
    far : float, optional
        Minimum start of the algebraic tail mapping.
    tail_factor : float
        Multiplier on the tail start; >1 gives an independent refinement.
    """
    pts = [b for b in breaks if b > lower and math.isfinite(b)]
    edges_head = []
    start = lower
    if lower <= 0.0:
        x0 = 1.0 if scale is None else min(1.0, 0.5 * scale)
        if pts:
            x0 = min(x0, min(pts))
        edges_head = [0.0]
        start = x0
    top = max([start, *pts])
    tail_start = tail_factor * max(4.0 * top, far or 0.0, 4.0 * (scale or 0.0))
    if scale is not None and scale > start:
        pts.append(scale)
    edges = geometric_edges([start, *pts, tail_start], ratio)
    if edges_head:
        edges = np.concatenate([edges_head, edges])
    x1, w1 = panel_rule(edges)
    x2, w2 = tail_rule(tail_start)
    return np.concatenate([x1, x2]), np.concatenate([w1, w2])


def finite_rule(
    a: float, b: float, breaks=(), ratio: float = PANEL_RATIO
) -> tuple[np.ndarray, np.ndarray]:
    """Geometric composite rule on ``[a, b]`` with ``a > 0``."""
    pts = [p for p in breaks if a < p < b]
    return panel_rule(geometric_edges([a, *pts, b], ratio))


def power_substitution_rule(b: float, power: int = 4, n: int = PANEL_POINTS):
    """Rule on ``[0, b]`` via ``x = b t^power``; absorbs ``x^(1/power - 1)``-type roots at 0."""
    xi, wi = _gauss_legendre(n)
    t = 0.5 * (xi + 1.0)
    nodes = b * t**power
    weights = 0.5 * wi * b * power * t ** (power - 1)
    return nodes, weights


def pad_rules(rules) -> tuple[np.ndarray, np.ndarray]:
    """Stack ragged (nodes, weights) pairs into 2-D arrays padded with zero weight."""
    width = max(len(x) for x, _ in rules)
    nodes = np.ones((len(rules), width))
    weights = np.zeros((len(rules), width))
    for i, (x, w) in enumerate(rules):
        nodes[i, : len(x)] = x
        weights[i, : len(w)] = w
    return nodes, weights
