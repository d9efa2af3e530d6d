"""Coverage, energy efficiency and tilt optimization for mmWave cellular networks.

Single-tier MBS networks and two-tier MBS/FBS networks with blockage,
sectorized horizontal beams, a tiltable vertical pattern and Nakagami fading.
"""
from .coverage import (
    CoverageResult,
    coverage_femto,
    coverage_femto_lower_bound,
    coverage_hetnet_approx,
    coverage_homogeneous,
    coverage_homogeneous_approx,
    coverage_macro_hetnet,
    mean_serving_distance,
    serving_distance,
)
from .distance import EquivalentDistanceMap, ServingDistanceDist, r_eq, r_eq_inv
from .energy import (
    OptimizationOutcome,
    TiltRange,
    ee_hetnet,
    ee_homogeneous,
    optimize_hetnet_joint,
    optimize_tilt_bisection,
    optimize_tilt_exhaustive,
    tilt_range,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .laplace import InterferenceTier, LaplaceExponent, laplace_derivatives, laplace_value
from .model import (
    AntennaSpec,
    FadingModel,
    HorizontalGainDist,
    NetworkParams,
    PathLossModel,
    VerticalPattern,
    db_to_linear,
    linear_to_db,
)

__version__ = "0.1.0"

__all__ = [
    "AntennaSpec", "CoverageResult", "EquivalentDistanceMap", "FadingModel",
    "HorizontalGainDist", "InterferenceTier", "KERNEL_BACKEND", "LaplaceExponent",
    "NetworkParams", "OptimizationOutcome", "PathLossModel", "ServingDistanceDist",
    "TiltRange", "VerticalPattern", "coverage_femto", "coverage_femto_lower_bound",
    "coverage_hetnet_approx", "coverage_homogeneous", "coverage_homogeneous_approx",
    "coverage_macro_hetnet", "db_to_linear", "ee_hetnet", "ee_homogeneous",
    "laplace_derivatives", "laplace_value", "linear_to_db", "mean_serving_distance",
    "optimize_hetnet_joint", "optimize_tilt_bisection", "optimize_tilt_exhaustive",
    "r_eq", "r_eq_inv", "serving_distance", "tilt_range",
]
