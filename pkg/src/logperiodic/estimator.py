"""scikit-learn compatible wrapper around :func:`fit_lppl`.

``X`` is the time axis in fractional years (shape ``(n,)`` or ``(n, 1)``)
and ``y`` the price, so the regressor composes with sklearn utilities such
as ``clone``, ``GridSearchCV`` over ``scaling_factor`` and pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .fit import FitConfig, fit_lppl
from .forecast import extrema_times
from .ingest import PriceSeries
from .model import evaluate_model


def _as_times(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    X = check_array(X, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single time column, got {X.shape[1]} features")
    return X[:, 0]


class LogPeriodicRegressor(RegressorMixin, BaseEstimator):
    """Log-periodic power-law regressor with profiled grid-search fitting.

    Parameters
    ----------
    side : {"pre", "post"}
        Whether the data precede or follow the critical time.
    scaling_factor : float or sequence of float
        Preferred scaling factor; a sequence is grid-scanned.
    tc_range : (lo, hi) or None
        Search interval for the critical time.  None derives it from the data.
    tc_step : float
        Grid spacing for the critical time, in years.
    alpha_range : (lo, hi)
        Search interval for the power-law exponent, within [0.05, 1.5].
    alpha_step : float
    refine_rounds : int
    fit_log_price : bool
        Fit log(price) instead of price; predictions are returned as price.
    """

    def __init__(
        self,
        side="pre",
        scaling_factor=2.0,
        tc_range=None,
        tc_step=1.0 / 365.0,
        alpha_range=(0.05, 1.5),
        alpha_step=0.05,
        refine_rounds=6,
        fit_log_price=False,
    ):
        self.side = side
        self.scaling_factor = scaling_factor
        self.tc_range = tc_range
        self.tc_step = tc_step
        self.alpha_range = alpha_range
        self.alpha_step = alpha_step
        self.refine_rounds = refine_rounds
        self.fit_log_price = fit_log_price

    def _config(self) -> FitConfig:
        lambdas = np.atleast_1d(self.scaling_factor).astype(float)
        tc_grid = None
        if self.tc_range is not None:
            tc_grid = (self.tc_range[0], self.tc_range[1], self.tc_step)
        return FitConfig(
            side=self.side,
            lambdas=tuple(lambdas),
            tc_grid=tc_grid,
            alpha_grid=(self.alpha_range[0], self.alpha_range[1], self.alpha_step),
            refine_rounds=self.refine_rounds,
            fit_log_price=self.fit_log_price,
        )

    def fit(self, X, y):
        t = _as_times(X)
        t, y = check_X_y(t[:, None], y, y_numeric=True)
        order = np.argsort(t[:, 0], kind="stable")
        series = PriceSeries(t[order, 0], y[order])
        self.fit_result_ = fit_lppl(series, self._config())
        self.params_ = self.fit_result_.params
        self.t_crit_ = self.params_.t_crit
        self.alpha_ = self.params_.alpha
        self.coef_ = np.array([self.params_.p_crit, self.params_.a_env, self.params_.c_cos, self.params_.d_sin])
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        values = np.atleast_1d(evaluate_model(self.params_, _as_times(X)))
        return np.exp(values) if self.fit_log_price else values

    def extrema(self, t_from: float, t_to: float):
        """Predicted (maxima, minima) of the fitted oscillation in a time range."""
        check_is_fitted(self, "params_")
        return extrema_times(self.params_, t_from, t_to)
