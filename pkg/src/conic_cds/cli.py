"""Command-line interface.

Exit codes: 0 success, 2 data or assumption failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from datetime import date

import numpy as np
from dateutil.relativedelta import relativedelta

from . import __version__
from .calibrator import SolverSettings, bootstrap_mid, calibrate_bid_ask, price_quotes
from .curves import CurveForm, DiscountCurve, HazardCurve
from .exceptions import AssumptionViolation, CalibrationError, QuoteFileError, SolverError
from .io import (
    ResultFile,
    dumps_result,
    file_sha256,
    parse_discount_curve,
    parse_quotes,
    read_result,
    survival_samples,
)
from .schedule import tenor_to_maturity, year_fraction

EXIT_OK = 0
EXIT_DATA = 2
EXIT_SOLVER = 3

logger = logging.getLogger("conic_cds")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    if isinstance(x, date):
        return x.isoformat()
    return "" if x is None else str(x)


def _table(rows: list[dict], out=None) -> None:
    out = out or sys.stdout
    if not rows:
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(rows[0].keys())
    for r in rows:
        w.writerow(_fmt(v) for v in r.values())


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_market_args(p: argparse.ArgumentParser, two_price: bool = True) -> None:
    p.add_argument("--quotes", required=True, help="quote CSV with key=value preamble")
    p.add_argument("--discount-curve", help="CSV with date,df or tenor_years,df rows")
    p.add_argument("--flat-rate", type=float, help="flat continuously-compounded rate instead of a curve file")
    p.add_argument("--curve-form", choices=["const", "linear"], default="const")
    p.add_argument("--grid-days", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-13, help="root-finder argument tolerance")
    if two_price:
        p.add_argument("--distortion", choices=["minmaxvar", "wang"], default="minmaxvar")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--format", choices=["csv", "json"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conic-cds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bootstrap", help="hazard curve from mid quotes")
    _add_market_args(p, two_price=False)
    _add_output_args(p)
    p.add_argument("--survival-dates", help="comma-separated ISO dates or tenors to sample")

    p = sub.add_parser("calibrate", help="hazard curve and liquidity from bid/ask quotes")
    _add_market_args(p)
    _add_output_args(p)
    p.add_argument("--survival-dates", help="comma-separated ISO dates or tenors to sample")
    p.add_argument("--fixed-gamma", type=float, help="hold the distortion level fixed and match mids")

    p = sub.add_parser("price", help="value, bid and ask of the quoted contracts")
    _add_market_args(p)
    _add_output_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--lambda", dest="lambdas", help="one flat rate or one rate per quote")
    src.add_argument("--result", help="take hazard rates and distortion levels from a result file")
    p.add_argument("--gamma", help="one distortion level or one per quote (default 0)")

    p = sub.add_parser("survival", help="survival probabilities from a result file")
    p.add_argument("--result", required=True)
    p.add_argument("--dates", help="comma-separated ISO dates or tenors")
    p.add_argument("--step-months", type=int, help="regular sampling step up to the last pillar")
    _add_output_args(p)

    p = sub.add_parser("export-plot", help="series for plotting premia, errors, hazard rates and liquidity")
    p.add_argument("--result", required=True)
    p.add_argument("--quotes", required=True)
    p.add_argument("--points", type=int, default=200, help="samples of the hazard and liquidity curves")
    p.add_argument("--out", help="output CSV path; stdout when omitted")
    return parser


def _discount(args, valuation: date) -> DiscountCurve:
    if args.discount_curve and args.flat_rate is not None:
        raise _Conflict("--discount-curve and --flat-rate are mutually exclusive")
    if args.discount_curve:
        return parse_discount_curve(args.discount_curve, valuation)
    return DiscountCurve.flat(args.flat_rate or 0.0, valuation)


class _Conflict(Exception):
    pass


def _settings(args) -> SolverSettings:
    if args.grid_days < 1:
        raise _Conflict("--grid-days must be at least 1")
    if not args.tol > 0:
        raise _Conflict("--tol must be positive")
    return SolverSettings(curve_form=CurveForm(args.curve_form), grid_days=args.grid_days, xtol=args.tol)


def _dates(text: str | None, valuation: date) -> list[date]:
    if not text:
        return []
    out = []
    for item in text.split(","):
        item = item.strip()
        try:
            out.append(date.fromisoformat(item))
        except ValueError:
            out.append(tenor_to_maturity(valuation, item))
    return out


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _out_format(args) -> str:
    if args.format:
        return args.format
    if args.out and args.out.lower().endswith(".csv"):
        return "csv"
    return "json"


def _run_calibration(args, two_price: bool) -> int:
    qf = parse_quotes(args.quotes, two_price=two_price)
    disc = _discount(args, qf.valuation_date)
    settings = _settings(args)
    meta = {"quotes_sha256": file_sha256(args.quotes),
            "discount_sha256": file_sha256(args.discount_curve) if args.discount_curve else None,
            "flat_rate": args.flat_rate if not args.discount_curve else None,
            "version": __version__}
    surv_dates = _dates(args.survival_dates, qf.valuation_date)
    code = EXIT_OK
    try:
        if two_price:
            if args.fixed_gamma is not None and args.fixed_gamma < 0:
                raise _Conflict("--fixed-gamma must be non-negative")
            result = calibrate_bid_ask(qf.quotes, disc, args.distortion, settings, args.fixed_gamma)
        else:
            result = bootstrap_mid(qf.quotes, disc, settings)
    except CalibrationError as exc:
        code = EXIT_SOLVER if isinstance(exc, SolverError) else EXIT_DATA
        label = ""
        if isinstance(exc, AssumptionViolation):
            label = f"Assumption {exc.assumption} violated: " if exc.assumption in (1, 2) else "monotonicity: "
        print(f"error: {label}{exc}", file=sys.stderr)
        result = exc.partial_result
        if result is None:
            return code
    rf = ResultFile.from_calibration(result, meta, surv_dates)
    rows = [dict(tenor=p.tenor, maturity=p.maturity, **{"lambda": p.lam}, gamma=p.gamma,
                 residual_bid=p.residual_bid, residual_ask=p.residual_ask) for p in rf.pillars]
    if args.out:
        _emit(dumps_result(rf, _out_format(args)), args.out)
        _table(rows)
    else:
        _emit(dumps_result(rf, _out_format(args)), None)
    return code


def _per_quote(values: list[float], n: int, name: str) -> list[float]:
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise _Conflict(f"--{name} needs one value or one per quote ({n})")
    return values


def _run_price(args) -> int:
    qf = parse_quotes(args.quotes, two_price=False)
    disc = _discount(args, qf.valuation_date)
    settings = _settings(args)
    n = len(qf.quotes)
    if args.result:
        if args.gamma:
            raise _Conflict("--gamma cannot be combined with --result")
        rf = read_result(args.result)
        curve = rf.hazard_curve()
        if rf.metadata.get("distortion"):
            args.distortion = rf.metadata["distortion"]
        gammas = [float(g) for g in rf.liquidity(_quote_times(qf, settings))]
    else:
        lams = _per_quote(_float_list(args.lambdas), n, "lambda")
        gammas = _per_quote(_float_list(args.gamma or "0"), n, "gamma")
        if any(g < 0 for g in gammas):
            raise _Conflict("distortion levels must be non-negative")
        knots = _quote_times(qf, settings)
        curve = HazardCurve(tuple(knots), tuple(lams), settings.curve_form) if len(lams) > 1 \
            else HazardCurve.flat(lams[0], horizon=max(knots[-1], 50.0))
    rows = price_quotes(qf.quotes, disc, curve, gammas, args.distortion, settings)
    buf = io.StringIO()
    if _out_format(args) == "json":
        buf.write(json.dumps([{k: (v.isoformat() if isinstance(v, date) else v) for k, v in r.items()}
                              for r in rows], indent=2) + "\n")
    else:
        _table(rows, buf)
    _emit(buf.getvalue(), args.out)
    if args.out:
        _table(rows)
    return EXIT_OK


def _quote_times(qf, settings) -> list[float]:
    return [year_fraction(qf.valuation_date, q.maturity, settings.conventions.curve_day_count)
            for q in qf.quotes]


def _run_survival(args) -> int:
    rf = read_result(args.result)
    val = rf.valuation
    if args.dates and args.step_months:
        raise _Conflict("--dates and --step-months are mutually exclusive")
    if args.dates:
        dates = _dates(args.dates, val)
    else:
        step = args.step_months or 3
        if step < 1:
            raise _Conflict("--step-months must be positive")
        last = max(p.maturity for p in rf.pillars)
        dates, k = [], 1
        while (d := val + relativedelta(months=step * k)) <= last:
            dates.append(d)
            k += 1
        dates.append(last)
    samples = survival_samples(rf.hazard_curve(), val, dates)
    rows = [dict(date=s.date, time=s.time, survival=s.survival) for s in samples]
    if args.format == "json":
        _emit(json.dumps([{"date": s.date.isoformat(), "time": s.time, "survival": s.survival}
                          for s in samples], indent=2) + "\n", args.out)
    else:
        buf = io.StringIO()
        _table(rows, buf)
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _run_export_plot(args) -> int:
    rf = read_result(args.result)
    qf = parse_quotes(args.quotes, two_price=False)
    if args.points < 2:
        raise _Conflict("--points must be at least 2")
    by_tenor = {q.tenor: q for q in qf.quotes}
    rows = []
    for p in rf.pillars:
        q = by_tenor.get(p.tenor)
        if q is not None:
            rows.append(dict(series="uf_bid", label=p.tenor, x=p.time, y=q.uf_bid))
            rows.append(dict(series="uf_ask", label=p.tenor, x=p.time, y=q.uf_ask))
        rows.append(dict(series="calibration_error", label=p.tenor, x=p.time,
                         y=abs(p.residual_bid) + abs(p.residual_ask)))
    curve = rf.hazard_curve()
    horizon = curve.knot_times[-1]
    ts = np.linspace(0.0, horizon, args.points)
    for t, lam in zip(ts, curve.hazard_rate(ts)):
        rows.append(dict(series="hazard_rate", label="", x=float(t), y=float(lam)))
    for t, g in zip(ts, rf.liquidity(ts)):
        rows.append(dict(series="gamma", label="", x=float(t), y=float(g)))
    buf = io.StringIO()
    _table(rows, buf)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


_COMMANDS = {
    "bootstrap": lambda a: _run_calibration(a, two_price=False),
    "calibrate": lambda a: _run_calibration(a, two_price=True),
    "price": _run_price,
    "survival": _run_survival,
    "export-plot": _run_export_plot,
}


def _configure_logging() -> None:
    level = os.environ.get("CONIC_CDS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def run_cli(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _Conflict as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (QuoteFileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
