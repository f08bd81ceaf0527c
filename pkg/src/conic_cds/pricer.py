"""Risk-neutral valuation of CDS legs on a discrete default-time grid."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .curves import DiscountCurve, HazardCurve
from .schedule import CdsSchedule, DayCount, year_fraction


class LegTag(enum.Enum):
    PROT = "prot"
    PREM = "prem"
    NET = "net"


@dataclass(frozen=True)
class CdsContract:
    """Unit-notional CDS, protection-buyer perspective."""

    schedule: CdsSchedule
    coupon: float
    lgd: float

    def __post_init__(self):
        if not 0.0 <= self.lgd <= 1.0:
            raise ValueError(f"lgd must lie in [0, 1], got {self.lgd}")
        if self.coupon < 0:
            raise ValueError(f"coupon must be non-negative, got {self.coupon}")

    @property
    def maturity(self) -> date:
        return self.schedule.maturity

    @property
    def notional(self) -> float:
        return 1.0


@dataclass(frozen=True, eq=False)
class DefaultGrid:
    """Partition of the default time into cells ``(d[k-1], d[k]]`` plus ``{tau > e_N}``.

    ``point`` selects the representative default time of a cell: its
    midpoint ("mid") or its right end ("right"). Every pricing routine uses
    the same representative point, so grid expectations of deferred payoffs
    and the direct leg sums agree to rounding.
    """

    valuation: date
    days: np.ndarray
    times: np.ndarray
    point: str = "mid"

    @property
    def n_cells(self) -> int:
        """Number of default cells, excluding the survival cell."""
        return self.days.size - 1

    @property
    def rep_days(self) -> np.ndarray:
        if self.point == "mid":
            return 0.5 * (self.days[:-1] + self.days[1:])
        return self.days[1:].astype(float)

    @property
    def rep_times(self) -> np.ndarray:
        if self.point == "mid":
            return 0.5 * (self.times[:-1] + self.times[1:])
        return self.times[1:].copy()

    def cell_masses(self, h: HazardCurve) -> np.ndarray:
        """Q-probability of every cell; the last entry is the survival cell."""
        ps = h.survival(self.times)
        ps[0] = 1.0
        return np.concatenate([ps[:-1] - ps[1:], ps[-1:]])


def default_grid(schedule: CdsSchedule, step_days: int = 1, point: str = "mid") -> DefaultGrid:
    """Regular grid from valuation to maturity that also contains every schedule date."""
    if step_days < 1:
        raise ValueError("grid step must be at least one day")
    if point not in ("mid", "right"):
        raise ValueError("point must be 'mid' or 'right'")
    val = schedule.valuation
    n_days = (schedule.maturity - val).days
    key = [(schedule.protection_effective - val).days]
    key += [(e - val).days for e in schedule.accrual_ends]
    days = np.union1d(np.arange(0, n_days + 1, step_days), np.array(key, dtype=int))
    days = days[(days >= 0) & (days <= n_days)]
    if schedule.curve_day_count is DayCount.ACT_365F:
        times = days / 365.0
    elif schedule.curve_day_count is DayCount.ACT_360:
        times = days / 360.0
    else:
        times = np.array([year_fraction(val, val + timedelta(days=int(d)), schedule.curve_day_count)
                          for d in days])
    return DefaultGrid(valuation=val, days=days, times=times, point=point)


def _days(schedule: CdsSchedule, dates) -> np.ndarray:
    return np.array([(d - schedule.valuation).days for d in dates], dtype=float)


def _accrual_at(schedule: CdsSchedule, grid: DefaultGrid, period: np.ndarray) -> np.ndarray:
    """Accrued fraction Delta(s_j, tau) at each cell's representative point."""
    starts = _days(schedule, schedule.accrual_starts)[period]
    conv = schedule.accrual_day_count
    if conv is DayCount.ACT_360:
        return (grid.rep_days - starts) / 360.0
    if conv is DayCount.ACT_365F:
        return (grid.rep_days - starts) / 365.0
    # non-ACT: interpolate between the node values
    s_dates = [schedule.accrual_starts[j] for j in period]
    node = lambda d: grid.valuation + timedelta(days=int(d))  # noqa: E731
    right = np.array([year_fraction(s, node(d), conv) for s, d in zip(s_dates, grid.days[1:])])
    if grid.point == "right":
        return right
    left = np.array([year_fraction(s, max(s, node(d)), conv) for s, d in zip(s_dates, grid.days[:-1])])
    return 0.5 * (left + right)


@dataclass(frozen=True, eq=False)
class _GridLegs:
    """Hazard-independent ingredients of a contract priced on a grid."""

    grid: DefaultGrid
    period: np.ndarray
    protected: np.ndarray
    df_rep: np.ndarray
    accrual: np.ndarray
    df_pay: np.ndarray
    pay_times: np.ndarray
    df_maturity: float


def _grid_legs(c: CdsContract, disc: DiscountCurve, grid: DefaultGrid) -> _GridLegs:
    sched = c.schedule
    n_days = (sched.maturity - sched.valuation).days
    if grid.days[0] != 0 or grid.days[-1] != n_days or grid.valuation != sched.valuation:
        raise ValueError("default grid does not match the contract schedule")
    end_days = _days(sched, sched.accrual_ends)
    period = np.searchsorted(end_days, grid.days[1:], side="left")
    tp_days = (sched.protection_effective - sched.valuation).days
    protected = grid.rep_days >= tp_days
    pay_times = np.array([sched.time(t) for t in sched.payment_dates])
    return _GridLegs(
        grid=grid,
        period=period,
        protected=protected,
        df_rep=np.asarray(disc.df(grid.rep_times)),
        accrual=_accrual_at(sched, grid, period),
        df_pay=np.asarray(disc.df(pay_times)),
        pay_times=pay_times,
        df_maturity=float(disc.df(sched.time(sched.maturity))),
    )


class RiskNeutralPricer:
    """Direct leg sums for one contract; the grid is built once, the hazard curve varies."""

    def __init__(self, c: CdsContract, disc: DiscountCurve, step_days: int = 1, point: str = "mid"):
        self.contract = c
        self._legs = _grid_legs(c, disc, default_grid(c.schedule, step_days, point))
        sched = c.schedule
        self._end_times = np.array([sched.time(e) for e in sched.accrual_ends])
        self._fractions = np.asarray(sched.accrual_fractions)

    def protection(self, h: HazardCurve) -> float:
        legs = self._legs
        mass = legs.grid.cell_masses(h)[:-1]
        return self.contract.lgd * float(np.sum(legs.df_rep * mass * legs.protected))

    def premium(self, h: HazardCurve) -> float:
        """Coupon annuity on survival plus accrual paid on default."""
        legs = self._legs
        coupons = np.sum(legs.df_pay * self._fractions * np.asarray(h.survival(self._end_times)))
        mass = legs.grid.cell_masses(h)[:-1]
        on_default = np.sum(legs.df_rep * legs.accrual * mass)
        return self.contract.coupon * float(coupons + on_default)

    def pv(self, h: HazardCurve) -> float:
        return self.protection(h) - self.premium(h)


def pv_protection(c: CdsContract, disc: DiscountCurve, h: HazardCurve,
                  step_days: int = 1, point: str = "mid") -> float:
    return RiskNeutralPricer(c, disc, step_days, point).protection(h)


def pv_premium(c: CdsContract, disc: DiscountCurve, h: HazardCurve,
               step_days: int = 1, point: str = "mid") -> float:
    return RiskNeutralPricer(c, disc, step_days, point).premium(h)


def pv_cds(c: CdsContract, disc: DiscountCurve, h: HazardCurve,
           step_days: int = 1, point: str = "mid") -> float:
    return pv_protection(c, disc, h, step_days, point) - pv_premium(c, disc, h, step_days, point)


def accrued_amount(c: CdsContract, disc: DiscountCurve) -> float:
    """Coupon accrued from the first accrual start to protection start, paid at cash settle."""
    sched = c.schedule
    frac = year_fraction(sched.accrual_starts[0], sched.protection_effective, sched.accrual_day_count)
    return float(disc.df(sched.time(sched.cash_settle))) * c.coupon * frac


@dataclass(frozen=True, eq=False)
class DeferredPayoff:
    """Cell values of the contract's cashflows, all carried to maturity.

    ``values[k]`` is the payoff when default falls in cell ``k``; the last
    entry is the survival cell. Premium values are magnitudes (non-negative).
    """

    values: np.ndarray
    leg: LegTag
    grid: DefaultGrid
    df_maturity: float


def deferred_payoff(c: CdsContract, disc: DiscountCurve, grid: DefaultGrid,
                    leg: LegTag | str = LegTag.NET) -> DeferredPayoff:
    leg = LegTag(leg)
    legs = _grid_legs(c, disc, grid)
    dfm = legs.df_maturity
    fractions = np.asarray(c.schedule.accrual_fractions)
    if leg is LegTag.PROT:
        values = np.append(c.lgd * legs.df_rep * legs.protected / dfm, 0.0)
    elif leg is LegTag.PREM:
        paid = np.concatenate([[0.0], np.cumsum(fractions * legs.df_pay)])
        on_default = paid[legs.period] + legs.accrual * legs.df_rep
        values = c.coupon * np.append(on_default, paid[-1]) / dfm
    else:
        prot = deferred_payoff(c, disc, grid, LegTag.PROT).values
        prem = deferred_payoff(c, disc, grid, LegTag.PREM).values
        values = prot - prem
    return DeferredPayoff(values=values, leg=leg, grid=grid, df_maturity=dfm)


def check_monotonicity_condition(c: CdsContract, first_period: int = 0) -> bool:
    """Whether lgd exceeds coupon times the largest accrual fraction from ``first_period`` on.

    Under this condition the contract value strictly increases in the hazard
    rate of the pillar whose segment starts in ``first_period``.
    """
    fractions = c.schedule.accrual_fractions[first_period:]
    if not fractions:
        return False
    return c.lgd > c.coupon * max(fractions)
