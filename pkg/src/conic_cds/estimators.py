"""Estimator wrappers with the fit/predict and get_params conventions of scikit-learn.

``fit`` takes the quotes in place of ``X`` and the discount curve in place
of ``y``; ``predict`` maps times in years to survival probabilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_discount_curve, check_quotes, check_times
from .calibrator import XTOL, SolverSettings, bootstrap_mid, calibrate_bid_ask, price_quotes
from .curves import LAMBDA_MAX, LAMBDA_MIN, CurveForm
from .distortion import GAMMA_MAX
from .schedule import year_fraction


class _CdsCurveEstimator(BaseEstimator):
    def _settings(self) -> SolverSettings:
        return SolverSettings(
            curve_form=CurveForm(self.curve_form),
            grid_days=self.grid_days,
            point=self.point,
            xtol=self.xtol,
            lambda_bounds=(LAMBDA_MIN, self.lambda_max),
            gamma_max=getattr(self, "gamma_max", GAMMA_MAX),
        )

    def _store(self, result, disc):
        self.result_ = result
        self.hazard_curve_ = result.hazard_curve
        self.lambdas_ = result.lambdas
        self.gammas_ = result.gammas
        self.pillar_times_ = result.times
        self.discount_curve_ = disc
        self.n_pillars_ = len(result.pillars)
        return self

    def predict(self, X):
        """Survival probability at each time (years from valuation)."""
        check_is_fitted(self, "hazard_curve_")
        return np.asarray(self.hazard_curve_.survival(check_times(X)))

    def hazard_rate(self, X):
        check_is_fitted(self, "hazard_curve_")
        return np.asarray(self.hazard_curve_.hazard_rate(check_times(X)))

    def default_probability(self, X):
        return 1.0 - self.predict(X)


class MidQuoteBootstrapper(_CdsCurveEstimator):
    """Piecewise hazard curve that reprices every mid upfront exactly."""

    def __init__(self, curve_form="const", grid_days=1, point="mid", xtol=XTOL, lambda_max=LAMBDA_MAX):
        self.curve_form = curve_form
        self.grid_days = grid_days
        self.point = point
        self.xtol = xtol
        self.lambda_max = lambda_max

    def fit(self, X, y):
        quotes = check_quotes(X, two_price=False)
        disc = check_discount_curve(y)
        return self._store(bootstrap_mid(quotes, disc, self._settings()), disc)


class BidAskCalibrator(_CdsCurveEstimator):
    """Joint hazard-rate and implied-liquidity calibration to bid and ask upfronts.

    Parameters
    ----------
    distortion : {"minmaxvar", "wang"}
        Distortion family.
    curve_form : {"const", "linear"}
        Shape of the hazard rate between pillars.
    grid_days : int
        Default-time grid step in calendar days.
    point : {"mid", "right"}
        Representative default time inside each grid cell.
    xtol : float
        Argument tolerance of the bracketed root searches.
    gamma_max : float
        Upper end of the distortion-level search.
    fixed_gamma : float or None
        When set, hold the distortion level fixed and match mid quotes.
    """

    def __init__(self, distortion="minmaxvar", curve_form="const", grid_days=1, point="mid",
                 xtol=XTOL, lambda_max=LAMBDA_MAX, gamma_max=GAMMA_MAX, fixed_gamma=None):
        self.distortion = distortion
        self.curve_form = curve_form
        self.grid_days = grid_days
        self.point = point
        self.xtol = xtol
        self.lambda_max = lambda_max
        self.gamma_max = gamma_max
        self.fixed_gamma = fixed_gamma

    def fit(self, X, y):
        quotes = check_quotes(X, two_price=self.fixed_gamma is None)
        disc = check_discount_curve(y)
        result = calibrate_bid_ask(quotes, disc, self.distortion, self._settings(), self.fixed_gamma)
        return self._store(result, disc)

    def liquidity(self, X):
        """Distortion level at each time, linear between pillar maturities."""
        check_is_fitted(self, "result_")
        return self.result_.liquidity(check_times(X))

    def transform(self, X):
        """Model bid and ask upfronts of the given quotes' contracts, shape (n, 2)."""
        check_is_fitted(self, "result_")
        quotes = check_quotes(X, two_price=False)
        gammas = self.result_.liquidity([self._time(q) for q in quotes])
        rows = price_quotes(quotes, self.discount_curve_, self.hazard_curve_, gammas,
                            self.distortion, self._settings())
        return np.array([[r["uf_bid"], r["uf_ask"]] for r in rows])

    def _time(self, q):
        conv = self._settings().conventions
        return year_fraction(self.discount_curve_.valuation, q.maturity, conv.curve_day_count)
