"""Quote and discount-curve ingestion; result files in JSON or CSV."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .calibrator import CalibrationResult, MarketQuote
from .curves import CurveForm, DiscountCurve, HazardCurve
from .exceptions import QuoteFileError
from .schedule import DayCount, SEMIANNUAL_ROLL_MONTHS, tenor_to_maturity, year_fraction

logger = logging.getLogger(__name__)

QUOTE_HEADER = ("tenor", "uf_bid", "uf_ask")
PREAMBLE_KEYS = ("valuation_date", "recovery", "coupon")


@dataclass(frozen=True)
class QuoteFile:
    valuation_date: date
    recovery: float
    coupon: float
    quotes: tuple[MarketQuote, ...]


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _float(text: str, what: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise QuoteFileError(f"line {lineno}: unparseable number {text!r} for {what}") from None
    if not math.isfinite(value):
        raise QuoteFileError(f"line {lineno}: non-finite {what}")
    return value


def _date(text: str, lineno: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise QuoteFileError(f"line {lineno}: expected an ISO date (YYYY-MM-DD), got {text!r}") from None


def parse_quotes(path, two_price: bool = True, roll_months=SEMIANNUAL_ROLL_MONTHS) -> QuoteFile:
    """Read a quote file: ``key=value`` preamble lines, then a ``tenor,uf_bid,uf_ask`` table.

    Tenors are either ``6M``/``5Y`` style (mapped to standard maturities) or
    ISO maturity dates. Crossed quotes (bid above ask) are an error in
    two-price mode and a warning otherwise.
    """
    lines = Path(path).read_text().splitlines()
    meta: dict[str, str] = {}
    header_at = None
    for n, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line and "," not in line:
            key, _, value = line.partition("=")
            meta[key.strip().lower()] = value.strip()
            continue
        cols = [c.strip().lower() for c in line.split(",")]
        if tuple(cols[:3]) != QUOTE_HEADER:
            raise QuoteFileError(f"line {n}: expected header {','.join(QUOTE_HEADER)!r}, got {line!r}")
        header_at = n
        break
    if header_at is None:
        raise QuoteFileError(f"{path}: missing header {','.join(QUOTE_HEADER)!r}")
    missing = [k for k in PREAMBLE_KEYS if k not in meta]
    if missing:
        raise QuoteFileError(f"{path}: missing preamble key(s) {', '.join(missing)}")

    valuation = _date(meta["valuation_date"], 0)
    recovery = _float(meta["recovery"], "recovery", 0)
    coupon = _float(meta["coupon"], "coupon", 0)
    if not 0 <= recovery < 1:
        raise QuoteFileError(f"recovery must lie in [0, 1), got {recovery}")

    quotes = []
    reader = csv.reader(lines[header_at:])
    for n, row in enumerate(reader, start=header_at + 1):
        if not row or not "".join(row).strip() or row[0].strip().startswith("#"):
            continue
        if len(row) < 3:
            raise QuoteFileError(f"line {n}: expected 3 columns, got {len(row)}")
        tenor = row[0].strip()
        bid = _float(row[1], "uf_bid", n)
        ask = _float(row[2], "uf_ask", n)
        if bid > ask:
            if two_price:
                raise QuoteFileError(f"line {n}: bid {bid} above ask {ask} for {tenor}")
            logger.warning("line %d: bid %s above ask %s for %s", n, bid, ask, tenor)
        try:
            maturity = tenor_to_maturity(valuation, tenor, roll_months)
        except ValueError:
            maturity = _date(tenor, n)
        quotes.append(MarketQuote(maturity, bid, ask, coupon, recovery, tenor))
    if not quotes:
        raise QuoteFileError(f"{path}: no quote rows")
    quotes.sort(key=lambda q: q.maturity)
    return QuoteFile(valuation, recovery, coupon, tuple(quotes))


def parse_discount_curve(path, valuation: date | None = None,
                         day_count: DayCount = DayCount.ACT_365F) -> DiscountCurve:
    """Read ``date,df`` or ``tenor_years,df`` rows; dates need ``valuation``."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and "".join(r).strip() and not r[0].startswith("#")]
    if not rows:
        raise QuoteFileError(f"{path}: empty discount curve")
    header = [c.strip().lower() for c in rows[0]]
    if header[:2] not in (["date", "df"], ["tenor_years", "df"]):
        raise QuoteFileError(f"{path}: expected header 'date,df' or 'tenor_years,df'")
    if header[0] == "date" and valuation is None:
        raise QuoteFileError(f"{path}: dated discount nodes need a valuation date")
    times, dfs = [], []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise QuoteFileError(f"line {n}: expected 2 columns")
        if header[0] == "date":
            d = _date(row[0], n)
            if d < valuation:
                raise QuoteFileError(f"line {n}: node {d} before valuation {valuation}")
            t = year_fraction(valuation, d, day_count)
        else:
            t = _float(row[0], "tenor_years", n)
        times.append(t)
        dfs.append(_float(row[1], "df", n))
    if not times:
        raise QuoteFileError(f"{path}: empty discount curve")
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise QuoteFileError(f"{path}: discount nodes must be strictly increasing in time")
    if any(d > 1 for d in dfs):
        logger.warning("%s: discount factor above 1 (negative rates)", path)
    if any(d2 > d1 for d1, d2 in zip(dfs, dfs[1:])):
        logger.warning("%s: discount factors are not non-increasing", path)
    try:
        return DiscountCurve(tuple(times), tuple(dfs), valuation)
    except ValueError as exc:
        raise QuoteFileError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class PillarRecord:
    tenor: str
    maturity: date
    time: float
    lam: float
    gamma: float
    residual_bid: float
    residual_ask: float
    lambda_b: float
    lambda_a: float


@dataclass(frozen=True)
class SurvivalSample:
    date: date
    time: float
    survival: float


@dataclass
class ResultFile:
    metadata: dict
    pillars: list[PillarRecord]
    survival: list[SurvivalSample] = field(default_factory=list)

    @classmethod
    def from_calibration(cls, result: CalibrationResult, metadata: dict | None = None,
                         survival_dates=()) -> "ResultFile":
        s = result.settings
        meta = {
            "valuation_date": result.valuation.isoformat(),
            "mode": "bootstrap" if result.family is None else "calibrate",
            "distortion": None if result.family is None else result.family.value,
            "curve_form": s.curve_form.value,
            "grid_days": s.grid_days,
            "point": s.point,
            "xtol": s.xtol,
            "lambda_min": s.lambda_bounds[0],
            "lambda_max": s.lambda_bounds[1],
            "gamma_max": s.gamma_max,
            "failed_pillar": result.failed_pillar,
            "failure": result.failure,
        }
        meta.update(metadata or {})
        pillars = [
            PillarRecord(
                tenor=p.tenor or p.maturity.isoformat(), maturity=p.maturity, time=p.time,
                lam=p.lam, gamma=p.gamma, residual_bid=p.residual_bid, residual_ask=p.residual_ask,
                lambda_b=p.bracket[0] if p.bracket else math.nan,
                lambda_a=p.bracket[1] if p.bracket else math.nan,
            )
            for p in result.pillars
        ]
        out = cls(meta, pillars)
        if survival_dates and result.hazard_curve is not None:
            out.survival = survival_samples(out.hazard_curve(), result.valuation, survival_dates)
        return out

    @property
    def valuation(self) -> date:
        return date.fromisoformat(self.metadata["valuation_date"])

    def hazard_curve(self) -> HazardCurve:
        if not self.pillars:
            raise ValueError("result file holds no calibrated pillars")
        return HazardCurve(tuple(p.time for p in self.pillars), tuple(p.lam for p in self.pillars),
                           CurveForm(self.metadata.get("curve_form", "const")))

    def liquidity(self, t):
        return np.interp(t, [p.time for p in self.pillars], [p.gamma for p in self.pillars])

    def __eq__(self, other):
        if not isinstance(other, ResultFile):
            return NotImplemented
        return (_canon(self.metadata) == _canon(other.metadata)
                and _canon([asdict(p) for p in self.pillars]) == _canon([asdict(p) for p in other.pillars])
                and self.survival == other.survival)


def _canon(obj):
    # NaN != NaN; compare through a canonical encoding instead
    return json.dumps(obj, sort_keys=True, default=str)


def survival_samples(curve: HazardCurve, valuation: date, dates,
                     day_count: DayCount = DayCount.ACT_365F) -> list[SurvivalSample]:
    out = []
    for d in dates:
        t = year_fraction(valuation, d, day_count)
        out.append(SurvivalSample(d, t, float(curve.survival(t))))
    return out


_PILLAR_FIELDS = ["tenor", "maturity", "time", "lambda", "gamma", "residual_bid",
                  "residual_ask", "lambda_b", "lambda_a"]


def _pillar_row(p: PillarRecord) -> list:
    return [p.tenor, p.maturity.isoformat(), repr(p.time), repr(p.lam), repr(p.gamma),
            repr(p.residual_bid), repr(p.residual_ask), repr(p.lambda_b), repr(p.lambda_a)]


def dumps_result(rf: ResultFile, fmt: str = "json") -> str:
    if fmt == "json":
        doc = {
            "metadata": rf.metadata,
            "pillars": [dict(zip(_PILLAR_FIELDS, [p.tenor, p.maturity.isoformat(), p.time, p.lam, p.gamma,
                                                  p.residual_bid, p.residual_ask, p.lambda_b, p.lambda_a]))
                        for p in rf.pillars],
            "survival": [{"date": s.date.isoformat(), "time": s.time, "survival": s.survival}
                         for s in rf.survival],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown result format {fmt!r}")
    buf = io.StringIO()
    for key, value in rf.metadata.items():
        buf.write(f"# {key}={json.dumps(value)}\n")
    w = csv.writer(buf, lineterminator="\n")
    buf.write("[pillars]\n")
    w.writerow(_PILLAR_FIELDS)
    for p in rf.pillars:
        w.writerow(_pillar_row(p))
    if rf.survival:
        buf.write("[survival]\n")
        w.writerow(["date", "time", "survival"])
        for s in rf.survival:
            w.writerow([s.date.isoformat(), repr(s.time), repr(s.survival)])
    return buf.getvalue()


def _pillar_from(values: list) -> PillarRecord:
    tenor, mat, *nums = values
    nums = [float(x) for x in nums]
    return PillarRecord(str(tenor), date.fromisoformat(mat), *nums)


def loads_result(text: str) -> ResultFile:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        pillars = [_pillar_from([p[k] for k in _PILLAR_FIELDS]) for p in doc["pillars"]]
        survival = [SurvivalSample(date.fromisoformat(s["date"]), float(s["time"]), float(s["survival"]))
                    for s in doc.get("survival", [])]
        return ResultFile(doc["metadata"], pillars, survival)
    meta: dict = {}
    pillars, survival = [], []
    section = None
    header_seen = False
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = json.loads(value)
            continue
        if line.startswith("["):
            section, header_seen = line.strip("[]\n "), False
            continue
        if not header_seen:
            header_seen = True
            continue
        row = next(csv.reader([line]))
        if section == "pillars":
            pillars.append(_pillar_from(row))
        elif section == "survival":
            survival.append(SurvivalSample(date.fromisoformat(row[0]), float(row[1]), float(row[2])))
        else:
            raise QuoteFileError(f"result file row outside a section: {line!r}")
    if "valuation_date" not in meta:
        raise QuoteFileError("result file lacks metadata")
    return ResultFile(meta, pillars, survival)


def write_result(rf: ResultFile, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    path.write_text(dumps_result(rf, fmt))


def read_result(path) -> ResultFile:
    return loads_result(Path(path).read_text())
