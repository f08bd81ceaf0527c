"""Day counts, standard CDS roll dates and premium-leg schedules."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Sequence

import numpy as np
from dateutil.relativedelta import relativedelta

ROLL_DAY = 20
QUARTERLY_ROLL_MONTHS = (3, 6, 9, 12)
SEMIANNUAL_ROLL_MONTHS = (3, 9)

_TENOR_RE = re.compile(r"^\s*(\d+)\s*([MY])\s*$", re.IGNORECASE)


class DayCount(enum.Enum):
    ACT_360 = "ACT/360"
    ACT_365F = "ACT/365F"
    THIRTY_360 = "30/360"


def year_fraction(d1: date, d2: date, conv: DayCount = DayCount.ACT_360) -> float:
    """Year fraction between ``d1`` and ``d2`` (``d1 <= d2``) under ``conv``."""
    if d1 > d2:
        raise ValueError(f"year_fraction requires d1 <= d2, got {d1} > {d2}")
    if conv is DayCount.ACT_360:
        return (d2 - d1).days / 360.0
    if conv is DayCount.ACT_365F:
        return (d2 - d1).days / 365.0
    if conv is DayCount.THIRTY_360:
        # 30/360 bond basis
        day1 = min(d1.day, 30)
        day2 = d2.day
        if day2 == 31 and day1 == 30:
            day2 = 30
        days = 360 * (d2.year - d1.year) + 30 * (d2.month - d1.month) + (day2 - day1)
        return days / 360.0
    raise ValueError(f"unknown day count {conv!r}")


def previous_cds_date(d: date, roll_months: Sequence[int] = QUARTERLY_ROLL_MONTHS) -> date:
    """Latest roll date (the 20th of a roll month) on or before ``d``."""
    months = sorted(set(roll_months))
    year = d.year
    while True:
        for m in reversed(months):
            candidate = date(year, m, ROLL_DAY)
            if candidate <= d:
                return candidate
        year -= 1


def next_cds_date(d: date, roll_months: Sequence[int] = QUARTERLY_ROLL_MONTHS) -> date:
    """Earliest roll date strictly after ``d``."""
    months = sorted(set(roll_months))
    year = d.year
    while True:
        for m in months:
            candidate = date(year, m, ROLL_DAY)
            if candidate > d:
                return candidate
        year += 1


def parse_tenor(tenor: str) -> relativedelta:
    match = _TENOR_RE.match(tenor)
    if match is None:
        raise ValueError(f"unparseable tenor {tenor!r}; expected e.g. '6M' or '5Y'")
    n, unit = int(match.group(1)), match.group(2).upper()
    return relativedelta(months=n) if unit == "M" else relativedelta(years=n)


def tenor_to_maturity(
    valuation: date,
    tenor: str,
    roll_months: Sequence[int] = SEMIANNUAL_ROLL_MONTHS,
) -> date:
    """Standard maturity of the on-the-run contract with the given tenor.

    The on-the-run series changes on the roll dates in ``roll_months``; its
    maturity is three months after the latest roll date, shifted by the tenor.
    With semi-annual rolls (the default) a 5Y contract traded on 2020-02-13
    matures on 2024-12-20; with quarterly rolls it matures on 2025-03-20.
    """
    base = previous_cds_date(valuation, roll_months) + relativedelta(months=3)
    return base + parse_tenor(tenor)


def add_business_days(d: date, n: int) -> date:
    """Weekend-only business-day calendar."""
    return np.busday_offset(np.datetime64(d, "D"), n, roll="forward").astype(date)


@dataclass(frozen=True)
class CdsConventions:
    """Contract conventions shared by every quote of a calibration."""

    accrual_day_count: DayCount = DayCount.ACT_360
    curve_day_count: DayCount = DayCount.ACT_365F
    settle_lag_bd: int = 3
    protection_lag_d: int = 1
    pay_freq_months: int = 3
    roll_months: tuple[int, ...] = QUARTERLY_ROLL_MONTHS

    def __post_init__(self):
        if self.pay_freq_months not in (3, 6):
            raise ValueError("pay_freq_months must be 3 or 6")
        if self.settle_lag_bd < 0 or self.protection_lag_d < 0:
            raise ValueError("lags must be non-negative")


@dataclass(frozen=True)
class CdsSchedule:
    valuation: date
    protection_effective: date
    cash_settle: date
    accrual_starts: tuple[date, ...]
    accrual_ends: tuple[date, ...]
    payment_dates: tuple[date, ...]
    accrual_fractions: tuple[float, ...]
    accrual_day_count: DayCount = DayCount.ACT_360
    curve_day_count: DayCount = DayCount.ACT_365F

    @property
    def maturity(self) -> date:
        return self.accrual_ends[-1]

    def __len__(self) -> int:
        return len(self.accrual_starts)

    def time(self, d: date) -> float:
        """Curve time of ``d`` in years from valuation."""
        return year_fraction(self.valuation, d, self.curve_day_count)


def build_schedule(
    valuation: date,
    maturity: date,
    conventions: CdsConventions | None = None,
) -> CdsSchedule:
    """Accrual, payment, protection and settlement dates of one contract.

    Accrual periods start at the roll date on or before the protection
    effective date and step by the payment frequency; the final period ends
    at ``maturity``. Payment dates equal accrual end dates.
    """
    conv = conventions or CdsConventions()
    if maturity <= valuation:
        raise ValueError(f"maturity {maturity} must be after valuation {valuation}")

    t_p = valuation + timedelta(days=conv.protection_lag_d)
    t_s = add_business_days(valuation, conv.settle_lag_bd)
    if maturity < t_p:
        raise ValueError(f"maturity {maturity} precedes protection start {t_p}")
    s1 = previous_cds_date(t_p, conv.roll_months)

    starts: list[date] = []
    ends: list[date] = []
    start = s1
    k = 1
    while start < maturity:
        end = min(s1 + relativedelta(months=conv.pay_freq_months * k), maturity)
        starts.append(start)
        ends.append(end)
        start = end
        k += 1

    fractions = tuple(year_fraction(s, e, conv.accrual_day_count) for s, e in zip(starts, ends))
    return CdsSchedule(
        valuation=valuation,
        protection_effective=t_p,
        cash_settle=t_s,
        accrual_starts=tuple(starts),
        accrual_ends=tuple(ends),
        payment_dates=tuple(ends),
        accrual_fractions=fractions,
        accrual_day_count=conv.accrual_day_count,
        curve_day_count=conv.curve_day_count,
    )
