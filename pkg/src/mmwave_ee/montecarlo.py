"""Monte Carlo oracle: explicit point-process drops for both scenarios.

Every drop draws its own Philox stream keyed by ``(seed, drop index)``, so
results do not depend on how drops are split across worker processes.  SINR
samples are kept per drop; thresholds and sleep radii are applied afterwards,
which gives common random numbers across a sweep.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.spatial import cKDTree

from .distance import EquivalentDistanceMap, r_eq
from .model import HorizontalGainDist, NetworkParams, vertical_gain

SEED_ENV = "MMWAVE_EE_SEED"
DEFAULT_SEED = 20240607
_TAIL_FRACTION = 1e-3


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


@dataclass(frozen=True)
class DropConfig:
    """Simulation settings.  ``window_radius=None`` selects :func:`default_window`."""

    n_drops: int = 10_000
    rng_seed: int = DEFAULT_SEED
    scenario: Literal["homogeneous", "hetnet"] = "homogeneous"
    exact_hole_process: bool = True
    window_radius: float | None = None

    def __post_init__(self):
        if self.n_drops < 1:
            raise ValueError("n_drops must be at least 1")
        if self.window_radius is not None and self.window_radius <= 0:
            raise ValueError("window_radius must be positive")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    def resolved_window(self, params: NetworkParams) -> float:
        return self.window_radius or default_window(params)


@dataclass(frozen=True)
class EmpiricalEstimate:
    mean: float
    ci95_halfwidth: float
    n: int

    @classmethod
    def from_indicator(cls, hits) -> "EmpiricalEstimate":
        hits = np.asarray(hits, dtype=bool)
        n = hits.size
        p = float(hits.mean())
        return cls(p, min(1.96 * math.sqrt(p * (1.0 - p) / n), 1.0), n)


def interference_radius(params: NetworkParams) -> float:
    """Radius beyond which mean NLOS MBS interference is below 1e-3 of the mean-distance signal.

    Uses the serving signal at the mean serving distance with unit vertical
    gain.  NLOS links are the slowest-decaying ones once blockage has removed
    distant LOS links.
    """
    from .coverage import mean_serving_distance

    pl = params.path_loss
    rho_bar = mean_serving_distance(params)
    signal = pl.c_los * params.macro_gain.aligned * rho_bar ** (-pl.alpha_los)
    a = pl.alpha_nlos
    tail = 2.0 * math.pi * params.lambda_m * pl.c_nlos * params.macro_gain.mean() / (a - 2.0)
    return (tail / (_TAIL_FRACTION * signal)) ** (1.0 / (a - 2.0))


def default_window(params: NetworkParams) -> float:
    beta = params.path_loss.beta_blockage
    return max(5.0 / beta, 10.0 / math.sqrt(math.pi * params.lambda_m),
               3.0 * interference_radius(params))


def drop_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one drop."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


def _uniform_open(rng, n):
    return 1.0 - rng.random(n)  # (0, 1]


def _ppp_radii(rng, density, radius):
    n = rng.poisson(density * math.pi * radius**2)
    return radius * np.sqrt(_uniform_open(rng, n))


def _ppp_points(rng, density, radius):
    r = _ppp_radii(rng, density, radius)
    phi = rng.uniform(0.0, 2.0 * math.pi, r.size)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def _fading(rng, m: int, n: int):
    """Gamma(m, 1/m) power as a mean of m unit exponentials."""
    if m == 1:
        return rng.standard_exponential(n)
    return rng.standard_exponential((m, n)).mean(axis=0)


def _gains(rng, dist: HorizontalGainDist, n):
    return dist.sample(rng, n)


def _macro_link(rng, params: NetworkParams, r, theta_tilt, dmap):
    """Serving power and MBS interference at a user with MBSs at radii ``r``.

    Returns ``(signal, interference)`` or ``None`` when there is no MBS.
    """
    if r.size == 0:
        return None
    pl = params.path_loss
    los = rng.random(r.size) < np.exp(-pl.beta_blockage * r)
    req = np.where(los, r, r_eq(r, dmap))
    serving = int(np.argmin(req))
    d = _gains(rng, params.macro_gain, r.size)
    d[serving] = params.macro_gain.aligned
    g = vertical_gain(r, theta_tilt, params.vertical)
    loss = np.where(los, pl.c_los * r ** -pl.alpha_los, pl.c_nlos * r ** -pl.alpha_nlos)
    rx = params.p_m * loss * d * g * _fading(rng, params.m, r.size)
    signal = rx[serving]
    return signal, rx.sum() - signal


def _homogeneous_chunk(args):
    params, seed, window, theta_tilt, start, stop = args
    dmap = EquivalentDistanceMap.from_model(params.path_loss)
    out = np.zeros(stop - start)
    for k, i in enumerate(range(start, stop)):
        rng = drop_rng(seed, i)
        link = _macro_link(rng, params, _ppp_radii(rng, params.lambda_m, window), theta_tilt, dmap)
        if link is not None:
            signal, interference = link
            out[k] = signal / (interference + params.sigma2)
    return out


def _serving_chunk(args):
    params, seed, window, start, stop = args
    dmap = EquivalentDistanceMap.from_model(params.path_loss)
    beta = params.path_loss.beta_blockage
    out = np.full(stop - start, np.inf)
    for k, i in enumerate(range(start, stop)):
        rng = drop_rng(seed, i)
        r = _ppp_radii(rng, params.lambda_m, window)
        if r.size:
            los = rng.random(r.size) < np.exp(-beta * r)
            out[k] = np.min(np.where(los, r, r_eq(r, dmap)))
    return out


def _chunks(n, workers):
    size = max(1, math.ceil(n / max(1, workers * 4)))
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def _run(fn, head, n, workers):
    spans = _chunks(n, workers) if workers > 1 else [(0, n)]
    tasks = [(*head, a, b) for a, b in spans]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, tasks))
    else:
        parts = [fn(t) for t in tasks]
    return np.concatenate(parts, axis=-1)


def _check(params: NetworkParams, drop: DropConfig, scenario: str):
    if drop.scenario != scenario:
        raise ValueError(f"drop config is for scenario {drop.scenario!r}, not {scenario!r}")


def homogeneous_sinr(params: NetworkParams, drop: DropConfig, theta_tilt: float,
                     workers: int = 1) -> np.ndarray:
    """Per-drop SINR of the typical user (0 when the window holds no MBS)."""
    _check(params, drop, "homogeneous")
    head = (params, drop.rng_seed, drop.resolved_window(params), theta_tilt)
    return _run(_homogeneous_chunk, head, drop.n_drops, workers)


def drop_homogeneous(params: NetworkParams, drop: DropConfig, gamma, theta_tilt: float,
                     workers: int = 1) -> EmpiricalEstimate:
    """Empirical coverage ``Pr{SINR > gamma}``; an empty window counts as not covered."""
    sinr = homogeneous_sinr(params, drop, theta_tilt, workers)
    return EmpiricalEstimate.from_indicator(sinr > gamma)


def sample_serving_distance(params: NetworkParams, drop: DropConfig, workers: int = 1) -> np.ndarray:
    """LOS-equivalent distance to the strongest-on-average MBS, one sample per drop.

    Empty windows give ``inf``; pick a window well beyond the distance law's support.
    """
    head = (params, drop.rng_seed, drop.resolved_window(params))
    return _run(_serving_chunk, head, drop.n_drops, workers)


# -- two-tier network -------------------------------------------------------


def _hetnet_chunk(args):
    params, seed, window, exact, theta_tilt, r_c, start, stop = args
    dmap = EquivalentDistanceMap.from_model(params.path_loss)
    pl = params.path_loss
    r_c = np.asarray(r_c, dtype=float)
    reach = float(r_c.max()) if r_c.size else 0.0
    keep_prob = np.exp(-math.pi * params.lambda_m * r_c**2)
    n = stop - start
    macro = np.zeros((r_c.size, n))
    femto = np.zeros((r_c.size, n))
    for k, i in enumerate(range(start, stop)):
        rng = drop_rng(seed, i)
        mbs = _ppp_points(rng, params.lambda_m, window + reach)
        fbs = _ppp_points(rng, params.lambda_f, window)
        # serving FBS of the femto user, uniform in its disc
        rho_f = params.r_f * math.sqrt(_uniform_open(rng, 1)[0])
        phi = rng.uniform(0.0, 2.0 * math.pi)
        home = np.array([[rho_f * math.cos(phi), rho_f * math.sin(phi)]])
        u_keep = _uniform_open(rng, fbs.shape[0] + 1)

        if exact and reach > 0 and mbs.shape[0]:
            tree = cKDTree(mbs)
            near, _ = tree.query(np.vstack([fbs, home]), distance_upper_bound=reach)
            active = near[None, :] >= r_c[:, None]
        else:
            active = u_keep[None, :] <= keep_prob[:, None]
        fbs_active, home_active = active[:, :-1], active[:, -1]

        r_m = np.hypot(mbs[:, 0], mbs[:, 1])
        r_f = np.hypot(fbs[:, 0], fbs[:, 1])
        nlos_f = pl.c_nlos * r_f ** -pl.alpha_nlos

        # macro user at the origin
        link = _macro_link(rng, params, r_m, theta_tilt, dmap)
        fm = params.p_f * params.ell_w * nlos_f * _gains(rng, params.cross_fm_gain, r_f.size)
        fm = fm * rng.standard_exponential(r_f.size)
        if link is not None:
            signal, i_mbs = link
            i_fbs = fbs_active @ fm
            macro[:, k] = signal / (i_mbs + i_fbs + params.sigma2)

        # femto user at the origin, served by the FBS at ``home``
        mf = (params.p_m * params.ell_w * pl.c_nlos * r_m ** -pl.alpha_nlos
              * _gains(rng, params.cross_mf_gain, r_m.size)
              * vertical_gain(r_m, theta_tilt, params.vertical)
              * rng.standard_exponential(r_m.size))
        ff = (params.p_f * params.ell_w**2 * nlos_f * _gains(rng, params.femto_gain, r_f.size)
              * rng.standard_exponential(r_f.size))
        signal_f = (params.p_f * pl.c_los * rho_f ** -pl.alpha_los * params.femto_gain.aligned
                    * rng.standard_exponential())
        sinr_f = signal_f / (mf.sum() + fbs_active @ ff + params.sigma2)
        femto[:, k] = np.where(home_active, sinr_f, 0.0)
    return np.stack([macro, femto])


def hetnet_sinr(params: NetworkParams, drop: DropConfig, theta_tilt: float, r_c_values,
                workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-drop macro and femto SINR for each sleep radius, shape ``(len(r_c), n_drops)``.

    A silenced serving FBS gives femto SINR 0.
    """
    _check(params, drop, "hetnet")
    r_c = np.atleast_1d(np.asarray(r_c_values, dtype=float))
    if np.any(r_c < 0):
        raise ValueError("sleep radius must be nonnegative")
    head = (params, drop.rng_seed, drop.resolved_window(params), drop.exact_hole_process,
            theta_tilt, r_c)
    out = _run(_hetnet_chunk, head, drop.n_drops, workers)
    return out[0], out[1]


def drop_hetnet(params: NetworkParams, drop: DropConfig, gamma_m, gamma_f, theta_tilt, r_c,
                workers: int = 1) -> tuple[EmpiricalEstimate, EmpiricalEstimate]:
    macro, femto = hetnet_sinr(params, drop, theta_tilt, [r_c], workers)
    return (EmpiricalEstimate.from_indicator(macro[0] > gamma_m),
            EmpiricalEstimate.from_indicator(femto[0] > gamma_f))


def with_window(drop: DropConfig, factor: float, params: NetworkParams) -> DropConfig:
    """Same drop settings with the window scaled by ``factor`` (truncation checks)."""
    return replace(drop, window_radius=factor * drop.resolved_window(params))
