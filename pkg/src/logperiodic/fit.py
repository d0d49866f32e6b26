"""Profiled least-squares fitting of the log-periodic power law.

The four coefficients (p_crit, a_env, c_cos, d_sin) enter the model linearly
and are solved exactly by QR for every candidate (t_crit, alpha, lambda).
The outer problem is an exhaustive grid followed by a few rounds of local
grid refinement around the incumbent, which keeps the whole procedure
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import (
    InsufficientData,
    InvalidConfig,
    NoValidGridPoint,
    RankDeficient,
    SideViolation,
)
from .ingest import PriceSeries, slice_window
from .model import ModelParams, Side, angular_log_frequency, evaluate_model, to_amplitude_phase

COND_LIMIT = 1e10
ALPHA_BOUNDS = (0.05, 1.5)
DAY = 1.0 / 365.0
REFINE_OFFSETS = np.arange(-2, 3, dtype=float)
_CHUNK = 8


def grid_values(lo: float, hi: float, step: float) -> np.ndarray:
    """``lo, lo+step, ...`` up to and including ``hi`` (within rounding)."""
    n = int(math.floor((hi - lo) / step * (1 + 1e-12) + 1e-9)) + 1
    return lo + step * np.arange(max(n, 1), dtype=float)


@dataclass(frozen=True)
class FitConfig:
    """Search configuration for :func:`fit_lppl`.

    ``lambdas`` holds a single value for a fixed scaling factor or several
    for a grid scan.  ``tc_grid`` and ``alpha_grid`` are ``(lo, hi, step)``;
    a ``tc_grid`` of None is derived from the data (daily steps spanning one
    window length beyond the data on the configured side).  ``window`` is an
    optional ``(t_start, t_end)`` applied to the series before fitting.
    """

    side: Side = Side.PRE
    lambdas: tuple[float, ...] = (2.0,)
    tc_grid: tuple[float, float, float] | None = None
    alpha_grid: tuple[float, float, float] = (0.05, 1.5, 0.05)
    refine_rounds: int = 6
    fit_log_price: bool = False
    min_points: int = 8
    window: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "side", Side.parse(self.side))
        lambdas = self.lambdas
        if np.isscalar(lambdas):
            lambdas = (lambdas,)
        lambdas = tuple(float(v) for v in lambdas)
        if not lambdas:
            raise InvalidConfig("at least one scaling factor is required")
        for lam in lambdas:
            angular_log_frequency(lam)
        object.__setattr__(self, "lambdas", lambdas)

        lo, hi, step = (float(v) for v in self.alpha_grid)
        if not step > 0 or lo > hi:
            raise InvalidConfig(f"bad alpha grid {self.alpha_grid}")
        if lo < ALPHA_BOUNDS[0] - 1e-12 or hi > ALPHA_BOUNDS[1] + 1e-12:
            raise InvalidConfig(f"alpha grid must lie within {list(ALPHA_BOUNDS)}")
        object.__setattr__(self, "alpha_grid", (lo, hi, step))

        if self.tc_grid is not None:
            lo, hi, step = (float(v) for v in self.tc_grid)
            if not step > 0 or lo > hi:
                raise InvalidConfig(f"bad t_crit grid {self.tc_grid}")
            object.__setattr__(self, "tc_grid", (lo, hi, step))
        if self.window is not None:
            start, end = (float(v) for v in self.window)
            if not start < end:
                raise InvalidConfig(f"window start {start} must precede end {end}")
            object.__setattr__(self, "window", (start, end))
        if int(self.refine_rounds) < 0:
            raise InvalidConfig("refine_rounds must be >= 0")
        if int(self.min_points) < 8:
            raise InvalidConfig("min_points must be >= 8")

    def resolve_tc_grid(self, series: PriceSeries) -> tuple[float, float, float]:
        t0, t1 = float(series.t[0]), float(series.t[-1])
        if self.tc_grid is None:
            span = max(t1 - t0, 1.0)
            if self.side is Side.PRE:
                return (t1 + DAY, t1 + span, DAY)
            return (t0 - span, t0 - DAY, DAY)
        lo, hi, step = self.tc_grid
        if self.side is Side.PRE and lo < t1:
            raise InvalidConfig(f"pre-critical t_crit grid starts at {lo}, before the last observation {t1}")
        if self.side is Side.POST and hi > t0:
            raise InvalidConfig(f"post-critical t_crit grid ends at {hi}, after the first observation {t0}")
        return self.tc_grid

    def as_dict(self) -> dict:
        return {
            "side": self.side.value,
            "lambdas": list(self.lambdas),
            "tc_grid": None if self.tc_grid is None else list(self.tc_grid),
            "alpha_grid": list(self.alpha_grid),
            "refine_rounds": int(self.refine_rounds),
            "fit_log_price": bool(self.fit_log_price),
            "min_points": int(self.min_points),
            "window": None if self.window is None else list(self.window),
        }

    def apply_window(self, series: PriceSeries) -> PriceSeries:
        return series if self.window is None else slice_window(series, *self.window)


@dataclass(frozen=True, eq=False)
class FitResult:
    params: ModelParams
    rmse: float
    sse: float
    n_points: int
    objective_trace: np.ndarray  # rows of (t_crit, alpha, sse)
    degenerate: bool
    fit_log_price: bool = False
    tc_grid: tuple[float, float, float] | None = None
    config: FitConfig = field(default_factory=FitConfig)

    @property
    def amplitude(self) -> float:
        return to_amplitude_phase(self.params)[0]


class LinearSolution(NamedTuple):
    p_crit: float
    a_env: float
    c_cos: float
    d_sin: float
    sse: float


def _target(price: np.ndarray, fit_log_price: bool) -> np.ndarray:
    return np.log(price) if fit_log_price else np.asarray(price, dtype=float)


def _distances(t: np.ndarray, t_crit: float, side: Side) -> np.ndarray | None:
    """Signed-side distances, or None when some t is not strictly on ``side``."""
    x = t_crit - t if side is Side.PRE else t - t_crit
    if x.min() <= 0.0:
        return None
    return x


def _profile(x: np.ndarray, y: np.ndarray, alphas: np.ndarray, omega: float):
    """Solve the linear subproblem for every alpha at one t_crit.

    Householder QR of the augmented matrix ``[basis | y]`` yields R, Q^T y
    and the residual norm in one pass, without forming Q.  Returns
    (coef (k, 4), sse (k,), cond (k,)); rows whose basis condition number
    exceeds COND_LIMIT carry NaN coefficients and infinite sse.
    """
    log_x = np.log(x)
    cos_term = np.cos(omega * log_x)
    sin_term = np.sin(omega * log_x)
    n = x.size
    r = np.empty((alphas.size, 5, 5))
    # stacked QR is memory bound; small chunks stay in cache
    for lo in range(0, alphas.size, _CHUNK):
        chunk = alphas[lo:lo + _CHUNK]
        envelope = np.power(x[None, :], chunk[:, None])
        aug = np.empty((chunk.size, n, 5))
        aug[..., 0] = 1.0
        aug[..., 1] = envelope
        np.multiply(envelope, cos_term, out=aug[..., 2])
        np.multiply(envelope, sin_term, out=aug[..., 3])
        aug[..., 4] = y
        r_chunk = np.linalg.qr(aug, mode="r")
        r[lo:lo + chunk.size] = 0.0
        r[lo:lo + chunk.size, : r_chunk.shape[1]] = r_chunk

    r_basis = r[:, :4, :4]
    sv = np.linalg.svd(r_basis, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(sv[:, -1] > 0, sv[:, 0] / sv[:, -1], np.inf)
    ok = cond <= COND_LIMIT
    r_safe = np.where(ok[:, None, None], r_basis, np.eye(4))
    coef = np.linalg.solve(r_safe, r[:, :4, 4:5])[..., 0]
    sse = r[:, 4, 4] ** 2
    coef[~ok] = np.nan
    sse[~ok] = np.inf
    return coef, sse, cond


def solve_linear(
    series: PriceSeries,
    t_crit: float,
    alpha: float,
    lam: float = 2.0,
    side: Side | str = Side.PRE,
    fit_log_price: bool = False,
) -> LinearSolution:
    """Least-squares coefficients for fixed (t_crit, alpha, lam)."""
    side = Side.parse(side)
    if len(series) < 4:
        raise InsufficientData(f"need at least 4 points, got {len(series)}")
    x = _distances(series.t, t_crit, side)
    if x is None:
        raise SideViolation(f"observations are not all strictly {side.value}-critical of t_crit={t_crit}")
    coef, sse, cond = _profile(x, _target(series.price, fit_log_price), np.array([float(alpha)]), angular_log_frequency(lam))
    if not cond[0] <= COND_LIMIT:
        raise RankDeficient(f"basis condition number {cond[0]:.3g} exceeds {COND_LIMIT:.0e}")
    return LinearSolution(*(float(v) for v in coef[0]), float(sse[0]))


def residuals(series: PriceSeries, params: ModelParams, fit_log_price: bool = False) -> np.ndarray:
    """Rows of ``(t, observed - model)`` in input order."""
    observed = _target(series.price, fit_log_price)
    return np.column_stack((series.t, observed - evaluate_model(params, series.t)))


def _is_degenerate(params: ModelParams, rmse: float) -> bool:
    amplitude = to_amplitude_phase(params)[0]
    if params.a_env != 0.0 and amplitude / abs(params.a_env) < 1e-3:
        return True
    if rmse > 0.0 and amplitude / rmse < 1.0:
        return True
    return amplitude == 0.0


class _Search:
    """Bookkeeping for the grid search: trace plus the total-order incumbent."""

    def __init__(self, t: np.ndarray, y: np.ndarray, side: Side):
        self.t, self.y, self.side = t, y, side
        self.edge = float(t[-1]) if side is Side.PRE else float(t[0])
        self.trace: list[np.ndarray] = []
        self.best_key: tuple | None = None
        self.best: tuple | None = None  # (t_crit, alpha, lam, coef, sse)

    def key(self, t_crit: float, alpha: float, lam: float, sse: float) -> tuple:
        return (sse, abs(t_crit - self.edge), alpha, lam)

    def evaluate(self, t_crit: float, alphas: np.ndarray, lam: float) -> None:
        x = _distances(self.t, t_crit, self.side)
        if x is None:
            return
        coef, sse, _ = _profile(x, self.y, alphas, angular_log_frequency(lam))
        valid = np.isfinite(sse)
        if not valid.any():
            return
        self.trace.append(np.column_stack((np.full(valid.sum(), t_crit), alphas[valid], sse[valid])))
        for i in np.flatnonzero(valid):
            key = self.key(t_crit, float(alphas[i]), lam, float(sse[i]))
            if self.best_key is None or key < self.best_key:
                self.best_key = key
                self.best = (t_crit, float(alphas[i]), lam, coef[i].copy(), float(sse[i]))


def fit_lppl(series: PriceSeries, config: FitConfig | None = None) -> FitResult:
    """Fit the model to ``series`` by profiled grid search plus refinement.

    Ties in sse go to the t_crit closest to the data window, then to the
    smaller alpha, then the smaller scaling factor.
    """
    config = FitConfig() if config is None else config
    series = config.apply_window(series)
    if len(series) < config.min_points:
        raise InsufficientData(f"need at least {config.min_points} points, got {len(series)}")
    tc_lo, tc_hi, tc_step = config.resolve_tc_grid(series)
    a_lo, a_hi, a_step = config.alpha_grid
    tcs = grid_values(tc_lo, tc_hi, tc_step)
    alphas = grid_values(a_lo, a_hi, a_step)

    y = _target(series.price, config.fit_log_price)
    search = _Search(series.t, y, config.side)
    for lam in config.lambdas:
        for t_crit in tcs:
            search.evaluate(float(t_crit), alphas, lam)
    if search.best is None:
        raise NoValidGridPoint("every grid point was rank-deficient or on the wrong side of the data")

    dt, da = tc_step, a_step
    for _ in range(int(config.refine_rounds)):
        dt, da = dt / 2.0, da / 2.0
        t_c, alpha, lam = search.best[:3]
        local_t = np.unique(np.clip(t_c + dt * REFINE_OFFSETS, tc_lo, tc_hi))
        local_a = np.unique(np.clip(alpha + da * REFINE_OFFSETS, a_lo, a_hi))
        for t_crit in local_t:
            search.evaluate(float(t_crit), local_a, lam)

    t_crit, alpha, lam, coef, sse = search.best
    params = ModelParams(
        t_crit=t_crit,
        alpha=alpha,
        lam=lam,
        p_crit=float(coef[0]),
        a_env=float(coef[1]),
        c_cos=float(coef[2]),
        d_sin=float(coef[3]),
        side=config.side,
    )
    n = len(series)
    rmse = math.sqrt(sse / n)
    return FitResult(
        params=params,
        rmse=rmse,
        sse=sse,
        n_points=n,
        objective_trace=np.concatenate(search.trace),
        degenerate=_is_degenerate(params, rmse),
        fit_log_price=config.fit_log_price,
        tc_grid=(tc_lo, tc_hi, tc_step),
        config=config,
    )
