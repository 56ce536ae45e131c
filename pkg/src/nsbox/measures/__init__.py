"""Nonlocality measures and the monotonicity harness."""

from .bell import bell_value, chsh
from .communication import (
    CommStrategy,
    comm_cost_avg,
    comm_cost_worst,
    enumerate_strategies,
)
from .content import epr2, robustness
from .detection import detector_model, detector_model_by_operations, eta_star
from .entropy import kl_divergence, relative_entropy_nl
from .result import MeasureResult
from .suite import SUITE_MEASURES, SuiteReport, monotonicity_suite

__all__ = [
    "CommStrategy",
    "MeasureResult",
    "SUITE_MEASURES",
    "SuiteReport",
    "bell_value",
    "chsh",
    "comm_cost_avg",
    "comm_cost_worst",
    "detector_model",
    "detector_model_by_operations",
    "enumerate_strategies",
    "epr2",
    "eta_star",
    "kl_divergence",
    "monotonicity_suite",
    "relative_entropy_nl",
    "robustness",
]
