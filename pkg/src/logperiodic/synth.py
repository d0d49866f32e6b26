"""Synthetic price series from known model parameters.

Noise comes from ``numpy.random.Generator(PCG64(seed))`` via
``standard_normal``; with a fixed seed the output is bit-identical across
platforms supported by numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidConfig, NonPositiveGenerated
from .fit import DAY
from .ingest import PriceSeries, date_to_t, fractional_year_to_date
from .model import ModelParams, evaluate_model

RAMP_YEARS = 30.0 / 365.0


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``superbubble`` is an optional ``(params, ramp_start)`` overlay added on
    top of ``base``.  With ``snap_to_days`` the sample times are moved to the
    mid-day anchor of their calendar date, so the series survives a trip
    through the ``date,price`` CSV format unchanged.
    """

    base: ModelParams
    t_from: float
    t_to: float
    step: float = DAY
    superbubble: tuple[ModelParams, float] | None = None
    noise_sigma_rel: float = 0.0
    seed: int = 0
    snap_to_days: bool = False

    def __post_init__(self):
        if not self.step > 0:
            raise InvalidConfig(f"step must be positive, got {self.step}")
        if not self.t_from <= self.t_to:
            raise InvalidConfig("t_from must not exceed t_to")
        if not self.noise_sigma_rel >= 0:
            raise InvalidConfig("noise_sigma_rel must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig("seed must fit in 64 unsigned bits")


def sample_times(config: SynthConfig) -> np.ndarray:
    n = int(math.floor((config.t_to - config.t_from) / config.step * (1 + 1e-12) + 1e-9)) + 1
    t = config.t_from + config.step * np.arange(n, dtype=float)
    if config.snap_to_days:
        t = np.unique([date_to_t(fractional_year_to_date(v)) for v in t])
    return t


def ramp(t, start: float, width: float = RAMP_YEARS):
    """0 before ``start``, linear up to 1 over ``width`` years, then 1."""
    return np.clip((np.asarray(t, dtype=float) - start) / width, 0.0, 1.0)


def clean_prices(config: SynthConfig, t: np.ndarray) -> np.ndarray:
    price = np.asarray(evaluate_model(config.base, t), dtype=float)
    if config.superbubble is not None:
        params, start = config.superbubble
        weight = ramp(t, start)
        live = weight > 0
        overlay = np.zeros_like(price)
        overlay[live] = weight[live] * evaluate_model(params, t[live])
        price = price + overlay
    return price


def generate(config: SynthConfig, label: str = "synthetic") -> PriceSeries:
    t = sample_times(config)
    price = clean_prices(config, t)
    if config.noise_sigma_rel > 0:
        rng = np.random.Generator(np.random.PCG64(int(config.seed)))
        sigma = config.noise_sigma_rel * float(np.mean(price))
        price = price + sigma * rng.standard_normal(price.size)
    bad = np.flatnonzero(~(price > 0))
    if bad.size:
        raise NonPositiveGenerated(
            f"generated price {price[bad[0]]:.6g} <= 0 at t={t[bad[0]]:.6f}"
        )
    return PriceSeries(t, price, label)


def superbubble_params(
    t_crit: float,
    ramp_start: float,
    height: float,
    alpha: float = 0.5,
    oscillation: float = 0.6,
    lam: float = 2.0,
    phase: float = 0.0,
) -> ModelParams:
    """Overlay parameters for a local bubble that rises by ``height``.

    The envelope is zero at ``ramp_start`` and reaches ``height`` at
    ``t_crit``; ``oscillation`` is the amplitude as a fraction of the
    envelope coefficient.  ``height = 0`` gives an all-zero overlay.
    """
    if not ramp_start < t_crit:
        raise InvalidConfig("ramp_start must precede the overlay's critical time")
    a_env = -height / (t_crit - ramp_start) ** alpha
    amplitude = oscillation * abs(a_env)
    return ModelParams(
        t_crit=t_crit,
        alpha=alpha,
        lam=lam,
        p_crit=height,
        a_env=a_env,
        c_cos=amplitude * math.cos(phase),
        d_sin=amplitude * math.sin(phase),
    )
