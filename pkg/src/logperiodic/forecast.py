"""Forward-looking structure derived from fitted parameters.

Extrema here are turning points of the oscillatory factor alone: the phase
``omega*ln(x) - phi`` equals ``k*pi``.  They form geometric sequences in the
distance to the critical time with ratio ``lam`` per same-kind step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import (
    InconsistentSpacing,
    InvalidConfig,
    NonPositivePrice,
    SideViolation,
    ZeroOscillation,
)
from .fit import DAY, FitConfig, FitResult, fit_lppl, grid_values
from .ingest import PriceSeries
from .model import ModelParams, Side, evaluate_model, to_amplitude_phase

_PHASE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class ExtremaSequence:
    kind: str  # "max" or "min"
    times: np.ndarray  # ascending
    distances: np.ndarray  # |times - t_crit|, exact (not recomputed from times)
    t_crit: float
    lam: float
    side: Side = Side.PRE

    def __len__(self) -> int:
        return self.times.size

    def ratios(self) -> np.ndarray:
        """Ratio of consecutive distances, farther over nearer; all equal ``lam``."""
        d = self.distances
        if d.size < 2:
            return np.empty(0)
        return d[:-1] / d[1:] if self.side is Side.PRE else d[1:] / d[:-1]


def extrema_times(
    params: ModelParams,
    t_from: float,
    t_to: float,
    min_distance: float = DAY,
) -> tuple[ExtremaSequence, ExtremaSequence]:
    """Maxima and minima of the oscillatory factor inside ``[t_from, t_to]``.

    The range must lie on ``params.side`` of the critical time.  Extrema
    closer than ``min_distance`` to ``t_crit`` are dropped, otherwise the
    sequence would be infinite.
    """
    amplitude, phase = to_amplitude_phase(params)
    if amplitude == 0.0:
        raise ZeroOscillation("oscillation amplitude is zero; extrema are undefined")
    if not t_from <= t_to:
        raise InvalidConfig(f"t_from {t_from} exceeds t_to {t_to}")
    if not min_distance > 0:
        raise InvalidConfig("min_distance must be positive")
    tc = params.t_crit
    if params.side is Side.PRE:
        if t_to > tc:
            raise SideViolation(f"range end {t_to} lies past t_crit {tc}")
        x_near, x_far = tc - t_to, tc - t_from
    else:
        if t_from < tc:
            raise SideViolation(f"range start {t_from} lies before t_crit {tc}")
        x_near, x_far = t_from - tc, t_to - tc
    x_near = max(x_near, min_distance)

    omega = params.omega
    empty = (_sequence("max", [], params), _sequence("min", [], params))
    if x_far < x_near:
        return empty
    k_lo = math.ceil((omega * math.log(x_near) - phase) / math.pi - _PHASE_SLACK)
    k_hi = math.floor((omega * math.log(x_far) - phase) / math.pi + _PHASE_SLACK)
    if k_hi < k_lo:
        return empty
    ks = np.arange(k_lo, k_hi + 1)
    x = np.exp((ks * math.pi + phase) / omega)
    maxima = _sequence("max", x[ks % 2 == 0], params)
    minima = _sequence("min", x[ks % 2 != 0], params)
    return maxima, minima


def _sequence(kind: str, x, params: ModelParams) -> ExtremaSequence:
    x = np.asarray(x, dtype=float)
    if params.side is Side.PRE:
        x = np.sort(x)[::-1]  # far to near is ascending time
        times = params.t_crit - x
    else:
        x = np.sort(x)
        times = params.t_crit + x
    return ExtremaSequence(kind, times, x, params.t_crit, params.lam, params.side)


def estimate_tc_from_extrema(
    times: Sequence[float],
    lam: float = 2.0,
    side: Side | str | None = None,
    tol: float | None = None,
) -> tuple[float, float]:
    """Critical time implied by consecutive same-kind extrema.

    Each consecutive pair implies one critical time; the estimate is their
    least-squares (equal weight) combination and the second value is the rms
    spread of the implied times.  ``side`` defaults to the one suggested by
    the spacing (shrinking gaps mean pre-critical), or pre-critical for a
    single pair.
    """
    t = np.asarray(times, dtype=float)
    if t.size < 2:
        raise InvalidConfig("need at least two extrema")
    if not lam > 1:
        raise InvalidConfig(f"scaling factor must be > 1, got {lam}")
    steps = np.diff(t)
    if np.all(steps < 0):
        t, steps = t[::-1], -steps[::-1]
    elif not np.all(steps > 0):
        raise InvalidConfig("extrema times must be strictly monotone")

    if side is None:
        side = Side.POST if t.size > 2 and steps[-1] > steps[0] else Side.PRE
    side = Side.parse(side)
    if side is Side.PRE:
        implied = (lam * t[1:] - t[:-1]) / (lam - 1.0)
    else:
        implied = (lam * t[:-1] - t[1:]) / (lam - 1.0)
    t_crit = float(np.mean(implied))
    residual = float(np.sqrt(np.mean((implied - t_crit) ** 2)))
    if tol is not None and residual > tol:
        raise InconsistentSpacing(f"implied critical times spread by {residual:.3g} > {tol:.3g}")
    return t_crit, residual


def extrapolate(
    params: ModelParams,
    t_from: float,
    t_to: float,
    step: float,
    log_price: bool = False,
) -> PriceSeries:
    """Sample the model on ``t_from, t_from+step, ... <= t_to``.

    With ``log_price`` the parameters describe log-price and the samples
    are exponentiated.
    """
    if not step > 0:
        raise InvalidConfig("step must be positive")
    if not t_from <= t_to:
        raise InvalidConfig(f"t_from {t_from} exceeds t_to {t_to}")
    t = grid_values(t_from, t_to, step)
    values = np.atleast_1d(evaluate_model(params, t))
    if log_price:
        values = np.exp(values)
    try:
        return PriceSeries(t, values, label="model")
    except NonPositivePrice as exc:
        raise NonPositivePrice(exc.line, "model price is not positive; extrapolated beyond its valid range") from None


@dataclass(frozen=True)
class SuperBubbleThresholds:
    min_gap_years: float = 0.5
    max_rel_rmse: float = 0.05
    # the short-window fit must beat the long-term model on the short window by this sse factor
    min_sse_ratio: float = 2.0

    def as_dict(self) -> dict:
        return {
            "min_gap_years": self.min_gap_years,
            "max_rel_rmse": self.max_rel_rmse,
            "min_sse_ratio": self.min_sse_ratio,
        }


@dataclass(frozen=True, eq=False)
class SuperBubbleReport:
    long_fit: FitResult
    short_fit: FitResult
    is_superbubble: bool
    gap_years: float
    rel_rmse: float
    sse_ratio: float
    thresholds: SuperBubbleThresholds = field(default_factory=SuperBubbleThresholds)
    checks: dict = field(default_factory=dict)


def _rel_rmse(fit: FitResult, series: PriceSeries) -> float:
    if fit.fit_log_price:
        return fit.rmse  # log-price residuals are already relative
    return fit.rmse / float(np.mean(series.price))


def detect_superbubble(
    series: PriceSeries,
    long_config: FitConfig,
    short_config: FitConfig,
    thresholds: SuperBubbleThresholds | None = None,
) -> SuperBubbleReport:
    """Fit a long and a short (suffix) window and judge whether the short one
    is a separate bubble riding on the long-term one.

    The verdict requires: the short critical time precedes the long one by
    at least ``min_gap_years``; neither fit is degenerate; the short fit's
    rmse relative to mean price is at most ``max_rel_rmse``; and on the short
    window the short fit's sse is at least ``min_sse_ratio`` times smaller
    than that of the long-term model.
    """
    thresholds = SuperBubbleThresholds() if thresholds is None else thresholds
    if long_config.side is not Side.PRE or short_config.side is not Side.PRE:
        raise InvalidConfig("super-bubble detection needs pre-critical configurations")
    long_series = long_config.apply_window(series)
    short_series = short_config.apply_window(series)
    if not (short_series.t[-1] == long_series.t[-1] and short_series.t[0] > long_series.t[0]):
        raise InvalidConfig("short window must be a proper suffix of the long window")

    if long_config.fit_log_price != short_config.fit_log_price:
        raise InvalidConfig("long and short fits must use the same price scale")

    long_fit = fit_lppl(long_series, long_config)
    short_fit = fit_lppl(short_series, short_config)

    gap = long_fit.params.t_crit - short_fit.params.t_crit
    rel_rmse = _rel_rmse(short_fit, short_series)
    target = np.log(short_series.price) if long_fit.fit_log_price else short_series.price
    long_resid = target - evaluate_model(long_fit.params, short_series.t)
    long_sse = float(long_resid @ long_resid)
    sse_ratio = long_sse / short_fit.sse if short_fit.sse > 0 else math.inf

    checks = {
        "gap": gap >= thresholds.min_gap_years,
        "long_not_degenerate": not long_fit.degenerate,
        "short_not_degenerate": not short_fit.degenerate,
        "short_rel_rmse": rel_rmse <= thresholds.max_rel_rmse,
        "sse_ratio": sse_ratio >= thresholds.min_sse_ratio,
    }
    return SuperBubbleReport(
        long_fit=long_fit,
        short_fit=short_fit,
        is_superbubble=all(checks.values()),
        gap_years=gap,
        rel_rmse=rel_rmse,
        sse_ratio=sse_ratio,
        thresholds=thresholds,
        checks=checks,
    )

