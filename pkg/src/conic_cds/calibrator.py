"""Sequential hazard-rate bootstrap (one price) and joint hazard/liquidity calibration (bid/ask)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .choquet import ConicCdsPricer, LegTails
from .curves import LAMBDA_MAX, LAMBDA_MIN, CurveForm, DiscountCurve, HazardCurve
from .distortion import GAMMA_MAX, Distortion, DistortionFamily
from .exceptions import AssumptionViolation, CalibrationError, SolverError
from .pricer import CdsContract, RiskNeutralPricer, accrued_amount, check_monotonicity_condition
from .schedule import CdsConventions, build_schedule

logger = logging.getLogger(__name__)

XTOL = 1e-13
MAXITER = 200
_INITIAL_LAMBDA = 0.01


@dataclass(frozen=True)
class MarketQuote:
    """Bid/ask upfront premia (fractions of notional) of one standard-coupon contract."""

    maturity: date
    uf_bid: float
    uf_ask: float
    coupon: float = 0.01
    recovery: float = 0.4
    tenor: str | None = None

    @property
    def lgd(self) -> float:
        return 1.0 - self.recovery

    @property
    def uf_mid(self) -> float:
        return 0.5 * (self.uf_bid + self.uf_ask)


@dataclass(frozen=True)
class PillarResult:
    tenor: str | None
    maturity: date
    time: float
    lam: float
    gamma: float
    residual_bid: float
    residual_ask: float
    bracket: tuple[float, float] | None = None


@dataclass(frozen=True)
class SolverSettings:
    """Numerical controls shared by the one- and two-price calibrations."""

    curve_form: CurveForm = CurveForm.PIECEWISE_CONSTANT
    grid_days: int = 1
    point: str = "mid"
    xtol: float = XTOL
    lambda_bounds: tuple[float, float] = (LAMBDA_MIN, LAMBDA_MAX)
    gamma_max: float = GAMMA_MAX
    conventions: CdsConventions = field(default_factory=CdsConventions)

    def __post_init__(self):
        object.__setattr__(self, "curve_form", CurveForm(self.curve_form))


@dataclass
class CalibrationResult:
    valuation: date
    family: DistortionFamily | None
    pillars: list[PillarResult]
    hazard_curve: HazardCurve | None
    settings: SolverSettings
    failed_pillar: int | None = None
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed_pillar is None

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.pillars])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.pillars])

    @property
    def times(self) -> np.ndarray:
        return np.array([p.time for p in self.pillars])

    def survival(self, t):
        return self.hazard_curve.survival(t)

    def liquidity(self, t):
        """Distortion parameter at time ``t``, linear between pillars and flat outside."""
        return np.interp(t, self.times, self.gammas)

    @property
    def max_abs_residual(self) -> float:
        res = [abs(r) for p in self.pillars for r in (p.residual_bid, p.residual_ask)]
        return max(res) if res else 0.0


def _root(f, lo, hi, xtol, what):
    try:
        x, info = brentq(f, lo, hi, xtol=xtol, maxiter=MAXITER, full_output=True)
    except (ValueError, RuntimeError) as exc:
        raise SolverError(f"{what}: {exc}") from exc
    if not info.converged:
        raise SolverError(f"{what}: no convergence after {info.iterations} iterations")
    return x


class PillarProblem:
    """Everything needed to solve for one pillar with the earlier pillars held fixed.

    ``b`` and ``a`` are the bid and ask targets on the value scale: the quoted
    upfront paid at cash settlement net of the accrued coupon.
    """

    def __init__(
        self,
        quote: MarketQuote,
        index: int,
        base_curve: HazardCurve,
        disc: DiscountCurve,
        family: DistortionFamily | str = DistortionFamily.MINMAXVAR,
        settings: SolverSettings | None = None,
    ):
        self.quote = quote
        self.index = index
        self.base_curve = base_curve
        self.family = DistortionFamily(family)
        self.settings = settings or SolverSettings()
        s = self.settings
        valuation = disc.valuation
        if valuation is None:
            raise ValueError("discount curve must carry a valuation date")
        self.contract = CdsContract(build_schedule(valuation, quote.maturity, s.conventions),
                                    coupon=quote.coupon, lgd=quote.lgd)
        sched = self.contract.schedule
        self.df_settle = float(disc.df(sched.time(sched.cash_settle)))
        self.acc = accrued_amount(self.contract, disc)
        self.b = self.df_settle * quote.uf_bid - self.acc
        self.a = self.df_settle * quote.uf_ask - self.acc
        self.mid = 0.5 * (self.a + self.b)
        self.rn = RiskNeutralPricer(self.contract, disc, s.grid_days, s.point)
        self.conic = ConicCdsPricer(self.contract, disc, s.grid_days, s.point)
        self._tails_cache: dict[float, LegTails] = {}

    @property
    def first_period(self) -> int:
        """First accrual period ending after the previous pillar."""
        if self.index == 0:
            return 0
        prev = self.base_curve.knot_times[self.index - 1]
        sched = self.contract.schedule
        for j, e in enumerate(sched.accrual_ends):
            if sched.time(e) > prev:
                return j
        return len(sched) - 1

    def curve(self, lam: float) -> HazardCurve:
        return self.base_curve.bump_pillar(self.index, lam)

    def pv(self, lam: float) -> float:
        return self.rn.pv(self.curve(lam))

    def tails(self, lam: float) -> LegTails:
        cached = self._tails_cache.get(lam)
        if cached is None:
            if len(self._tails_cache) > 256:
                self._tails_cache.clear()
            cached = self._tails_cache[lam] = self.conic.tails(self.curve(lam))
        return cached

    def distortion(self, gamma: float) -> Distortion:
        return Distortion(self.family, gamma)

    def bid_ask(self, lam: float, gamma: float) -> tuple[float, float]:
        return self.tails(lam).bid_ask(self.distortion(gamma))


def _check_monotone_regime(problem: PillarProblem):
    if not check_monotonicity_condition(problem.contract, problem.first_period):
        raise AssumptionViolation(
            f"pillar {problem.index}: lgd {problem.quote.lgd:g} does not exceed coupon times "
            "the largest accrual fraction; contract value need not increase in the hazard rate",
            assumption="monotonicity", pillar=problem.index)


def bracket_lambda(problem: PillarProblem) -> tuple[float, float]:
    """Hazard rates at which the risk-neutral value hits the bid and the ask target."""
    lo, hi = problem.settings.lambda_bounds
    pv_lo, pv_hi = problem.pv(lo), problem.pv(hi)
    if not (pv_lo < problem.b and pv_hi > problem.a):
        raise AssumptionViolation(
            f"pillar {problem.index}: quotes outside attainable values; value ranges over "
            f"[{pv_lo:.10g}, {pv_hi:.10g}] for hazard rates in [{lo:g}, {hi:g}] but bid/ask "
            f"targets are [{problem.b:.10g}, {problem.a:.10g}]",
            assumption=1, pillar=problem.index, inf_pv=pv_lo, sup_pv=pv_hi)
    xtol = problem.settings.xtol
    lam_b = _root(lambda x: problem.pv(x) - problem.b, lo, hi, xtol, f"pillar {problem.index} bid bracket")
    if problem.a == problem.b:
        return lam_b, lam_b
    lam_a = _root(lambda x: problem.pv(x) - problem.a, lam_b, hi, xtol, f"pillar {problem.index} ask bracket")
    return lam_b, lam_a


def solve_gamma_for_spread(problem: PillarProblem, lam: float, target_spread: float) -> float:
    """Distortion level at which the model bid/ask spread at ``lam`` equals ``target_spread``."""
    if target_spread < 0:
        raise ValueError("target spread must be non-negative")
    if target_spread == 0:
        return 0.0
    tails = problem.tails(lam)
    g_max = problem.settings.gamma_max
    spread_max = tails.spread(problem.distortion(g_max))
    if not spread_max > target_spread:
        raise AssumptionViolation(
            f"pillar {problem.index}: model spread {spread_max:.10g} at distortion level {g_max:g} "
            f"does not exceed the quoted spread {target_spread:.10g} (hazard rate {lam:.10g})",
            assumption=2, pillar=problem.index, max_spread=spread_max)
    return _root(lambda g: tails.spread(problem.distortion(g)) - target_spread, 0.0, g_max,
                 problem.settings.xtol, f"pillar {problem.index} spread solve")


def outer_residual(problem: PillarProblem, lam: float) -> tuple[float, float]:
    """Ask error after matching the spread at ``lam``; returns (F(lam), gamma(lam))."""
    gamma = solve_gamma_for_spread(problem, lam, problem.a - problem.b)
    _, ask = problem.bid_ask(lam, gamma)
    return ask - problem.a, gamma


def admissible_bracket(problem: PillarProblem) -> tuple[float, float]:
    """Bracket for the outer solve, clamped to the hazard bounds where a target is unattainable.

    Equals :func:`bracket_lambda` when both targets lie inside the attainable
    value range. When only one does, the missing end is the nearer hazard
    bound; the solution still satisfies b < PV < a there, and the caller
    verifies the sign of the ask residual at the clamped end. Raises
    Assumption 1 when (b, a) misses the attainable range entirely.
    """
    lo, hi = problem.settings.lambda_bounds
    pv_lo, pv_hi = problem.pv(lo), problem.pv(hi)
    if pv_lo < problem.b and pv_hi > problem.a:
        return bracket_lambda(problem)
    if not (pv_lo < problem.a and pv_hi > problem.b):
        return bracket_lambda(problem)  # raises with the attained range
    xtol = problem.settings.xtol
    where = f"pillar {problem.index}"
    if pv_lo < problem.b:
        lam_b = _root(lambda x: problem.pv(x) - problem.b, lo, hi, xtol, f"{where} bid bracket")
    else:
        lam_b = lo
        logger.warning("%s: bid target %.10g below attainable values (%.10g); bracket clamped to %g",
                       where, problem.b, pv_lo, lo)
    if pv_hi > problem.a:
        lam_a = _root(lambda x: problem.pv(x) - problem.a, lam_b, hi, xtol, f"{where} ask bracket")
    else:
        lam_a = hi
        logger.warning("%s: ask target %.10g above attainable values (%.10g); bracket clamped to %g",
                       where, problem.a, pv_hi, hi)
    return lam_b, lam_a


def calibrate_pillar(problem: PillarProblem) -> tuple[float, float, tuple[float, float]]:
    """Solve bid(lam, gamma) = b and ask(lam, gamma) = a for one pillar.

    Returns ``(lam, gamma, (lam_b, lam_a))``.
    """
    if not problem.a > problem.b:
        raise AssumptionViolation(
            f"pillar {problem.index}: zero or negative bid/ask spread cannot be matched by a "
            "positive distortion level", assumption=2, pillar=problem.index)
    lam_b, lam_a = admissible_bracket(problem)
    f_b, _ = outer_residual(problem, lam_b)
    f_a, _ = outer_residual(problem, lam_a)
    if not (f_b < 0 < f_a):
        raise SolverError(
            f"pillar {problem.index}: ask residual does not change sign over [{lam_b:.10g}, {lam_a:.10g}] "
            f"({f_b:.3g}, {f_a:.3g})", pillar=problem.index)
    lam = _root(lambda x: outer_residual(problem, x)[0], lam_b, lam_a, problem.settings.xtol,
                f"pillar {problem.index} hazard solve")
    gamma = solve_gamma_for_spread(problem, lam, problem.a - problem.b)
    pv = problem.pv(lam)
    if not problem.b < pv < problem.a:
        raise SolverError(
            f"pillar {problem.index}: risk-neutral value {pv:.10g} outside ({problem.b:.10g}, "
            f"{problem.a:.10g}) at the solution", pillar=problem.index)
    return lam, gamma, (lam_b, lam_a)


def _fixed_gamma_pillar(problem: PillarProblem, gamma: float) -> float:
    """Hazard rate matching the bid/ask midpoint at a fixed distortion level."""
    lo, hi = problem.settings.lambda_bounds

    def f(lam):
        bid, ask = problem.bid_ask(lam, gamma)
        return 0.5 * (bid + ask) - problem.mid

    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0 < f_hi):
        raise AssumptionViolation(
            f"pillar {problem.index}: mid target {problem.mid:.10g} not attainable at distortion "
            f"level {gamma:g}", assumption=1, pillar=problem.index)
    return _root(f, lo, hi, problem.settings.xtol, f"pillar {problem.index} fixed-gamma solve")


def _sorted_quotes(quotes: Sequence[MarketQuote]) -> list[MarketQuote]:
    quotes = list(quotes)
    if not quotes:
        raise ValueError("at least one quote is required")
    mats = [q.maturity for q in quotes]
    if any(m2 <= m1 for m1, m2 in zip(mats, mats[1:])):
        raise ValueError("quote maturities must be strictly increasing")
    return quotes


def _knots(quotes, disc: DiscountCurve, settings: SolverSettings):
    val = disc.valuation
    if val is None:
        raise ValueError("discount curve must carry a valuation date")
    sched = build_schedule(val, quotes[0].maturity, settings.conventions)
    return tuple(sched.time(q.maturity) for q in quotes)


def bootstrap_mid(
    quotes: Sequence[MarketQuote],
    disc: DiscountCurve,
    settings: SolverSettings | None = None,
) -> CalibrationResult:
    """One-price bootstrap: each pillar reprices its mid upfront with earlier pillars fixed."""
    settings = settings or SolverSettings()
    quotes = _sorted_quotes(quotes)
    knots = _knots(quotes, disc, settings)
    curve = HazardCurve(knots, (_INITIAL_LAMBDA,) * len(knots), settings.curve_form)
    lo, hi = settings.lambda_bounds
    pillars: list[PillarResult] = []
    for i, q in enumerate(quotes):
        try:
            problem = PillarProblem(q, i, curve, disc, settings=settings)
            _check_monotone_regime(problem)
            pv_lo, pv_hi = problem.pv(lo), problem.pv(hi)
            if not pv_lo < problem.mid < pv_hi:
                raise AssumptionViolation(
                    f"pillar {i}: mid target {problem.mid:.10g} outside attainable values "
                    f"[{pv_lo:.10g}, {pv_hi:.10g}]", assumption=1, pillar=i,
                    inf_pv=pv_lo, sup_pv=pv_hi)
            lam = _root(lambda x: problem.pv(x) - problem.mid, lo, hi, settings.xtol, f"pillar {i} mid solve")
        except CalibrationError as exc:
            exc.pillar = i
            exc.partial_result = _result(disc, None, pillars, curve, settings, i, str(exc))
            raise
        curve = curve.bump_pillar(i, lam)
        residual = problem.pv(lam) - problem.mid
        logger.info("pillar %d (%s): lambda=%.10g residual=%.3g", i, q.tenor or q.maturity, lam, residual)
        pillars.append(PillarResult(q.tenor, q.maturity, knots[i], lam, 0.0, residual, residual))
    return _result(disc, None, pillars, curve, settings)


def calibrate_bid_ask(
    quotes: Sequence[MarketQuote],
    disc: DiscountCurve,
    family: DistortionFamily | str = DistortionFamily.MINMAXVAR,
    settings: SolverSettings | None = None,
    fixed_gamma: float | None = None,
) -> CalibrationResult:
    """Two-price calibration of one hazard pillar and one distortion level per quote.

    With ``fixed_gamma`` set, the distortion level is held fixed and each
    pillar matches the bid/ask midpoint instead; ``fixed_gamma=0`` reduces to
    the mid bootstrap evaluated through the Choquet route.
    """
    settings = settings or SolverSettings()
    family = DistortionFamily(family)
    quotes = _sorted_quotes(quotes)
    knots = _knots(quotes, disc, settings)
    curve = HazardCurve(knots, (_INITIAL_LAMBDA,) * len(knots), settings.curve_form)
    pillars: list[PillarResult] = []
    for i, q in enumerate(quotes):
        try:
            problem = PillarProblem(q, i, curve, disc, family, settings)
            _check_monotone_regime(problem)
            if fixed_gamma is None:
                lam, gamma, bracket = calibrate_pillar(problem)
            else:
                lam, gamma, bracket = _fixed_gamma_pillar(problem, fixed_gamma), fixed_gamma, None
        except CalibrationError as exc:
            exc.pillar = i
            exc.partial_result = _result(disc, family, pillars, curve, settings, i, str(exc))
            raise
        curve = curve.bump_pillar(i, lam)
        bid, ask = problem.bid_ask(lam, gamma)
        logger.info("pillar %d (%s): lambda=%.10g gamma=%.10g", i, q.tenor or q.maturity, lam, gamma)
        pillars.append(PillarResult(q.tenor, q.maturity, knots[i], lam, gamma,
                                    bid - problem.b, ask - problem.a, bracket))
    return _result(disc, family, pillars, curve, settings)


def _result(disc, family, pillars, curve, settings, failed=None, failure=None):
    if pillars:
        n = len(pillars)
        hazard = HazardCurve(curve.knot_times[:n], curve.lambdas[:n], curve.form) if failed is not None else curve
    else:
        hazard = None
    return CalibrationResult(disc.valuation, family, pillars, hazard, settings, failed, failure)


def price_quotes(
    quotes: Sequence[MarketQuote],
    disc: DiscountCurve,
    curve: HazardCurve,
    gammas: Sequence[float],
    family: DistortionFamily | str = DistortionFamily.MINMAXVAR,
    settings: SolverSettings | None = None,
) -> list[dict]:
    """Model value, bid and ask of each quoted contract, on the value and upfront scales."""
    settings = settings or SolverSettings()
    rows = []
    for i, (q, g) in enumerate(zip(quotes, gammas)):
        problem = PillarProblem(q, i, curve, disc, family, settings)
        tails = problem.conic.tails(curve)
        bid, ask = tails.bid_ask(problem.distortion(g))
        pv = problem.rn.pv(curve)
        to_uf = lambda v: (v + problem.acc) / problem.df_settle  # noqa: E731
        rows.append(dict(tenor=q.tenor, maturity=q.maturity, gamma=g, pv=pv, bid=bid, ask=ask,
                         uf_pv=to_uf(pv), uf_bid=to_uf(bid), uf_ask=to_uf(ask), accrued=problem.acc))
    return rows


