"""Physical model primitives: blockage path loss, antenna patterns, fading.

Angles are taken in degrees and gains in dB at every public entry point;
internally gains are linear and angles radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Condition = Literal["los", "nlos"]

# Free-space gain at 1 m for a 28 GHz carrier: (c / (4 pi f))^2.
DEFAULT_REF_GAIN = 10.0 ** -6.14
# elevation angles (degrees) below this map to radii too far out to matter as breakpoints
_MIN_ELEVATION = 1e-4


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class PathLossModel:
    """Dual-slope LOS/NLOS path loss with exponential blockage.

    Attributes
    ----------
    c_los, c_nlos : float
        Linear gain at the 1 m reference distance.
    alpha_los, alpha_nlos : float
        Path-loss exponents, ``alpha_nlos >= alpha_los > 2``.
    beta_blockage : float
        Blockage intensity in 1/m; a link of length r is LOS w.p. exp(-beta r).
    """

    c_los: float = DEFAULT_REF_GAIN
    c_nlos: float = DEFAULT_REF_GAIN
    alpha_los: float = 2.5
    alpha_nlos: float = 4.0
    beta_blockage: float = 0.003

    def __post_init__(self):
        if not self.alpha_nlos >= self.alpha_los > 2.0:
            raise ValueError(
                f"need alpha_nlos >= alpha_los > 2, got {self.alpha_los}, {self.alpha_nlos}"
            )
        if self.c_los <= 0 or self.c_nlos <= 0:
            raise ValueError("reference gains must be positive")
        if self.beta_blockage <= 0:
            raise ValueError("beta_blockage must be positive")


@dataclass(frozen=True)
class VerticalPattern:
    """Parabolic elevation pattern with a side-lobe floor.

    ``theta_3db`` in degrees, ``sll_db`` as a positive dB number, ``h_eff``
    the BS-minus-user antenna height in meters.
    """

    theta_3db: float = 6.0
    sll_db: float = 20.0
    h_eff: float = 10.0

    def __post_init__(self):
        if self.theta_3db <= 0 or self.sll_db <= 0 or self.h_eff <= 0:
            raise ValueError("theta_3db, sll_db and h_eff must be positive")

    @property
    def half_span(self) -> float:
        """Angular offset (degrees) at which the pattern hits the side-lobe floor."""
        return self.theta_3db * math.sqrt(self.sll_db / 12.0)

    def kink_radii(self, theta_tilt: float) -> list[float]:
        """Horizontal distances where the gain switches between its two branches."""
        out = []
        for ang in (theta_tilt + self.half_span, theta_tilt - self.half_span):
            if _MIN_ELEVATION < ang < 90.0:
                out.append(self.h_eff / math.tan(math.radians(ang)))
        return sorted(out)

    def lobe_radii(self, theta_tilt: float, step: float | None = None) -> list[float]:
        """Radii splitting the main lobe into angular slices of ``step`` degrees.

        Used as quadrature breakpoints; includes the kinks and boresight.
        """
        step = self.theta_3db / 2.0 if step is None else step
        lo = max(theta_tilt - self.half_span, 0.0)
        hi = min(theta_tilt + self.half_span, 89.999)
        n = max(int(math.ceil((hi - lo) / step)), 1)
        angles = set(np.linspace(lo, hi, n + 1).tolist())
        if 0.0 < theta_tilt < 90.0:
            angles.add(theta_tilt)
        return sorted(self.h_eff / math.tan(math.radians(a)) for a in angles
                      if a > _MIN_ELEVATION)


@dataclass(frozen=True)
class HorizontalGainDist:
    """Four-point law of the product of transmit and receive sector gains."""

    values: tuple[float, float, float, float]
    probs: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.values) != 4 or len(self.probs) != 4:
            raise ValueError("need exactly four gain values and probabilities")
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must be nonnegative and sum to 1: {self.probs}")
        if any(v <= 0 for v in self.values):
            raise ValueError("gain values must be positive")

    @property
    def aligned(self) -> float:
        """Main-lobe-to-main-lobe gain, used for the serving link."""
        return self.values[0]

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def moment(self, power: float) -> float:
        return float(np.dot(np.power(self.values, power), self.probs))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(cum[:-1], rng.random(size), side="right")
        return np.asarray(self.values)[idx]


@dataclass(frozen=True)
class FadingModel:
    """Nakagami-m power fading, ``Gamma(m, 1/m)``; ``m = 1`` is Rayleigh."""

    nakagami_m: int = 1

    def __post_init__(self):
        if int(self.nakagami_m) != self.nakagami_m or self.nakagami_m < 1:
            raise ValueError(f"nakagami_m must be a positive integer, got {self.nakagami_m}")


@dataclass(frozen=True)
class AntennaSpec:
    """Sectorized horizontal antenna in interface units."""

    main_db: float = 10.0
    side_db: float = -10.0
    beamwidth_deg: float = 30.0


@dataclass(frozen=True)
class NetworkParams:
    """Deployment and physical-layer constants for both scenarios.

    ``vertical=None`` removes the elevation pattern altogether (G = 1 on every
    link); that is one of the two non-tilting baselines.
    """

    lambda_m: float = 4.973e-5
    lambda_f: float = 0.0
    p_m: float = 20.0
    p_f: float = 0.1
    p_cm: float = 68.73
    p_cf: float = 9.6
    eta_m: float = 3.77
    eta_f: float = 4.0
    sigma2: float = 4.0e-11
    ell_w: float = 0.1
    r_f: float = 30.0
    macro_gain: HorizontalGainDist = field(default=None)  # type: ignore[assignment]
    femto_gain: HorizontalGainDist = field(default=None)  # type: ignore[assignment]
    cross_fm_gain: HorizontalGainDist = field(default=None)  # type: ignore[assignment]
    cross_mf_gain: HorizontalGainDist = field(default=None)  # type: ignore[assignment]
    path_loss: PathLossModel = field(default_factory=PathLossModel)
    vertical: VerticalPattern | None = field(default_factory=VerticalPattern)
    fading: FadingModel = field(default_factory=FadingModel)

    def __post_init__(self):
        macro_tx, macro_rx = AntennaSpec(10.0, -10.0, 30.0), AntennaSpec(10.0, -10.0, 90.0)
        defaults = {
            "macro_gain": (macro_tx, macro_rx),
            "femto_gain": (macro_tx, macro_rx),
            "cross_fm_gain": (macro_tx, macro_rx),
            "cross_mf_gain": (macro_tx, macro_rx),
        }
        for name, (tx, rx) in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, horizontal_gain_dist_from(tx, rx))
        if self.lambda_m <= 0:
            raise ValueError("lambda_m must be positive")
        if self.lambda_f < 0:
            raise ValueError("lambda_f must be nonnegative")
        for name in ("p_m", "p_f", "p_cm", "p_cf", "eta_m", "eta_f", "r_f"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if not 0.0 < self.ell_w <= 1.0:
            raise ValueError("ell_w must lie in (0, 1]")

    @property
    def m(self) -> int:
        return int(self.fading.nakagami_m)

    @property
    def r_c_max(self) -> float:
        """Largest sleep radius, the mean cell radius 1/sqrt(pi lambda_m)."""
        return 1.0 / math.sqrt(math.pi * self.lambda_m)

    def lambda_f_active(self, r_c) -> float:
        """Density of FBSs left outside every sleep region (thinning approximation)."""
        return self.lambda_f * np.exp(-math.pi * self.lambda_m * np.square(r_c))

    @property
    def macro_power_per_bs(self) -> float:
        return self.p_cm + self.eta_m * self.p_m

    @property
    def femto_power_per_bs(self) -> float:
        return self.p_cf + self.eta_f * self.p_f


def los_probability(r, model: PathLossModel):
    """Probability that a link of horizontal length ``r`` is unobstructed."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distance must be nonnegative")
    out = np.exp(-model.beta_blockage * r)
    return out if out.ndim else float(out)


def path_loss(r, condition: Condition, model: PathLossModel):
    """Linear attenuation ``C_w r^{-alpha_w}`` for the given link condition."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("path loss is singular at r <= 0")
    if condition == "los":
        out = model.c_los * r ** -model.alpha_los
    elif condition == "nlos":
        out = model.c_nlos * r ** -model.alpha_nlos
    else:
        raise ValueError(f"unknown link condition {condition!r}")
    return out if out.ndim else float(out)


def vertical_gain_db(r_horizontal, theta_tilt, pat: VerticalPattern):
    theta = np.degrees(np.arctan(pat.h_eff / np.asarray(r_horizontal, dtype=float)))
    quad = 12.0 * ((theta - theta_tilt) / pat.theta_3db) ** 2
    # branch chosen on the real part so complex-step tilt derivatives survive
    return np.where(np.real(quad) < pat.sll_db, -quad, -pat.sll_db)


def vertical_gain(r_horizontal, theta_tilt, pat: VerticalPattern | None):
    """Linear elevation gain toward a user at horizontal distance ``r_horizontal``.

    Parameters
    ----------
    r_horizontal : float or array
        Horizontal BS-user distance in meters, > 0.
    theta_tilt : float
        Downtilt in degrees within [0, 90]. A complex value is accepted for
        complex-step differentiation with respect to the tilt.
    pat : VerticalPattern or None
        ``None`` means an omnidirectional elevation pattern (gain 1).
    """
    r = np.asarray(r_horizontal, dtype=float)
    if np.any(r <= 0):
        raise ValueError("horizontal distance must be positive")
    if not 0.0 <= np.real(theta_tilt) <= 90.0:
        raise ValueError(f"tilt must lie in [0, 90] degrees, got {theta_tilt}")
    if pat is None:
        out = np.ones_like(r) if np.isrealobj(theta_tilt) else r * 0j + 1.0
    else:
        out = 10.0 ** (vertical_gain_db(r, theta_tilt, pat) / 10.0)
    return out if np.ndim(out) else out[()]


def horizontal_gain_dist(
    tx_main: float,
    tx_side: float,
    tx_bw: float,
    rx_main: float,
    rx_side: float,
    rx_bw: float,
) -> HorizontalGainDist:
    """Build the four-point gain law from sector antennas (gains in dB, widths in degrees)."""
    for bw in (tx_bw, rx_bw):
        if not 0.0 < bw <= 360.0:
            raise ValueError(f"beamwidth must lie in (0, 360], got {bw}")
    if tx_main < tx_side or rx_main < rx_side:
        raise ValueError("main-lobe gain must not be below the side-lobe gain")
    mt, st, mr, sr = (float(db_to_linear(g)) for g in (tx_main, tx_side, rx_main, rx_side))
    ct, cr = tx_bw / 360.0, rx_bw / 360.0
    values = (mt * mr, mt * sr, st * mr, st * sr)
    probs = (ct * cr, ct * (1.0 - cr), (1.0 - ct) * cr, (1.0 - ct) * (1.0 - cr))
    return HorizontalGainDist(values, probs)


def horizontal_gain_dist_from(tx: AntennaSpec, rx: AntennaSpec) -> HorizontalGainDist:
    return horizontal_gain_dist(
        tx.main_db, tx.side_db, tx.beamwidth_deg, rx.main_db, rx.side_db, rx.beamwidth_deg
    )


def nakagami_ccdf(z, m: int):
    """CCDF of unit-mean Gamma(m, 1/m) power fading, by the finite series."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("z must be nonnegative")
    mz = m * z
    term = np.ones_like(mz)
    total = np.ones_like(mz)
    for k in range(1, m):
        term = term * mz / k
        total = total + term
    out = np.exp(-mz) * total
    return out if out.ndim else float(out)
