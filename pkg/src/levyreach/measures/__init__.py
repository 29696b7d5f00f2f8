"""Intensity measures of pure-jump noise."""

from ._base import QUAD_RTOL, IntensityMeasure, Tempering, radial_integral
from .atomic import Atomic
from .config import measure_from_config, measure_to_config, number, vector
from .ops import Annulus, Ball, compensator_drift, integrate_jump_map, mass_of_region, region_mass, sample_jump
from .product import Product
from .radial import RadialPolar, sphere_grid
from .subordinated import GaussianBase, Subordinated
from .support import (
    BallCertificate,
    H0Result,
    SupportReport,
    check_assumption_v,
    check_support_conditions_1d,
    h0_approximate,
    verify_ball_sum,
)

__all__ = [
    "QUAD_RTOL", "IntensityMeasure", "Tempering", "radial_integral", "Atomic", "RadialPolar",
    "Product", "GaussianBase", "Subordinated", "sphere_grid", "Annulus", "Ball", "mass_of_region",
    "region_mass", "sample_jump", "integrate_jump_map", "compensator_drift", "measure_from_config",
    "measure_to_config", "number", "vector", "SupportReport", "H0Result", "BallCertificate",
    "check_support_conditions_1d", "h0_approximate", "check_assumption_v", "verify_ball_sum",
]
