"""Log-periodic power-law fitting, critical-time estimation and super-bubble detection."""

from .exceptions import LogPeriodicError
from .estimator import LogPeriodicRegressor
from .fit import FitConfig, FitResult, fit_lppl, residuals, solve_linear
from .forecast import (
    SuperBubbleReport,
    SuperBubbleThresholds,
    detect_superbubble,
    estimate_tc_from_extrema,
    extrapolate,
    extrema_times,
)
from .ingest import PriceSeries, parse_csv, read_csv, slice_window, to_csv
from .model import ModelParams, Side, evaluate_model, evaluate_pi
from .synth import SynthConfig, generate, superbubble_params

__all__ = [
    "FitConfig",
    "FitResult",
    "LogPeriodicError",
    "LogPeriodicRegressor",
    "ModelParams",
    "PriceSeries",
    "Side",
    "SuperBubbleReport",
    "SuperBubbleThresholds",
    "SynthConfig",
    "detect_superbubble",
    "estimate_tc_from_extrema",
    "evaluate_model",
    "evaluate_pi",
    "extrapolate",
    "extrema_times",
    "fit_lppl",
    "generate",
    "parse_csv",
    "read_csv",
    "residuals",
    "slice_window",
    "solve_linear",
    "superbubble_params",
    "to_csv",
]
