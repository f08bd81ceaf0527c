"""Implied default probabilities and market liquidity from bid/ask CDS quotes."""

__version__ = "0.1.0"

from .calibrator import (  # noqa: E402
    CalibrationResult,
    MarketQuote,
    PillarProblem,
    PillarResult,
    SolverSettings,
    admissible_bracket,
    bootstrap_mid,
    bracket_lambda,
    calibrate_bid_ask,
    calibrate_pillar,
    solve_gamma_for_spread,
)
from .choquet import ConicCdsPricer, DistortedCellMeasure, ask_price, bid_price, choquet_integral  # noqa: E402
from .curves import CurveForm, DiscountCurve, HazardCurve  # noqa: E402
from .distortion import Distortion, DistortionFamily, distort, dual_distort  # noqa: E402
from .estimators import BidAskCalibrator, MidQuoteBootstrapper  # noqa: E402
from .exceptions import AssumptionViolation, CalibrationError, QuoteFileError, SolverError  # noqa: E402
from .pricer import (  # noqa: E402
    CdsContract,
    accrued_amount,
    check_monotonicity_condition,
    default_grid,
    deferred_payoff,
    pv_cds,
    pv_premium,
    pv_protection,
)
from .schedule import CdsConventions, DayCount, build_schedule, previous_cds_date, tenor_to_maturity, year_fraction  # noqa: E402,E501
