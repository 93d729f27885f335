"""Exact Hall-Littlewood transition laws for random matrix products over local fields."""

from .hall_littlewood import hl_expand, lr_coefficients
from .markov_sim import (
    joint_discrepancy_run,
    lln_clt_report,
    simulate_corner_sum,
    simulate_product_chain,
)
from .padic_oracle import validate_corners, validate_products
from .root_system import RootSystem, build_root_system
from .satake import (
    LatticeDistribution,
    ProbabilityContext,
    context,
    corners_distribution,
    g_coefficient,
    orbit_volume,
    product_transition,
)

__all__ = [
    "RootSystem", "build_root_system", "hl_expand", "lr_coefficients",
    "LatticeDistribution", "ProbabilityContext", "context", "corners_distribution",
    "product_transition", "g_coefficient", "orbit_volume",
    "simulate_product_chain", "simulate_corner_sum", "joint_discrepancy_run",
    "lln_clt_report", "validate_corners", "validate_products",
]
__version__ = "0.1.0"
