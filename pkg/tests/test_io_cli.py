import json
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from conic_cds.calibrator import calibrate_bid_ask
from conic_cds.cli import run_cli
from conic_cds.curves import DiscountCurve
from conic_cds.exceptions import QuoteFileError
from conic_cds.io import ResultFile, dumps_result, loads_result, parse_discount_curve, parse_quotes, read_result, write_result
from conic_cds.schedule import tenor_to_maturity

from conftest import EXAMPLE_CSV, VALUATION, example_quotes
from oracles import synthetic_quotes


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_example_quotes(quote_file):
    qf = parse_quotes(quote_file)
    assert qf.valuation_date == VALUATION and qf.recovery == 0.4 and qf.coupon == 0.01
    first, last = qf.quotes[0], qf.quotes[-1]
    assert (first.tenor, first.uf_bid, first.uf_ask) == ("6M", -0.0033, -0.0026)
    assert (last.tenor, last.uf_bid, last.uf_ask) == ("10Y", -0.0073, 0.0047)
    assert first.maturity == tenor_to_maturity(VALUATION, "6M")
    assert [q.maturity for q in qf.quotes] == sorted(q.maturity for q in qf.quotes)


def test_parse_sorts_rows_and_accepts_dates(tmp_path):
    p = _write(tmp_path, "q.csv", "valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\n"
               "# comment\ntenor,uf_bid,uf_ask\n5Y,-0.02,-0.019\n2021-12-20,-0.01,-0.009\n")
    qf = parse_quotes(p)
    assert [q.tenor for q in qf.quotes] == ["2021-12-20", "5Y"]


@pytest.mark.parametrize("text, needle", [
    ("", "tenor,uf_bid,uf_ask"),
    ("valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\n", "tenor,uf_bid,uf_ask"),
    ("recovery=0.4\ncoupon=0.01\ntenor,uf_bid,uf_ask\n5Y,-0.02,-0.01\n", "valuation_date"),
    ("valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\ntenor,uf_bid,uf_ask\n5Y,abc,-0.01\n", "unparseable"),
    ("valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\ntenor,uf_bid,uf_ask\n5Y,-0.02\n", "3 columns"),
])
def test_parse_errors(tmp_path, text, needle):
    with pytest.raises(QuoteFileError, match=needle):
        parse_quotes(_write(tmp_path, "q.csv", text))


def test_bid_above_ask(tmp_path, caplog):
    p = _write(tmp_path, "q.csv", "valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\n"
               "tenor,uf_bid,uf_ask\n5Y,-0.01,-0.02\n")
    with pytest.raises(QuoteFileError, match="above ask"):
        parse_quotes(p, two_price=True)
    assert len(parse_quotes(p, two_price=False).quotes) == 1
    assert "above ask" in caplog.text


def test_parse_discount_curve(tmp_path):
    unit = parse_discount_curve(_write(tmp_path, "a.csv", "tenor_years,df\n1.0,1.0\n"))
    assert unit(3.0) == pytest.approx(1.0, abs=1e-15)
    c = parse_discount_curve(_write(tmp_path, "b.csv", "tenor_years,df\n1,0.99\n5,0.95\n"))
    assert c(3.0) == pytest.approx(np.sqrt(0.99 * 0.95), abs=1e-15)
    dated = parse_discount_curve(_write(tmp_path, "c.csv", "date,df\n2021-02-13,0.99\n"), VALUATION)
    assert dated.valuation == VALUATION and dated(366 / 365) == pytest.approx(0.99)
    with pytest.raises(QuoteFileError):
        parse_discount_curve(_write(tmp_path, "d.csv", "tenor_years,df\n5,0.95\n1,0.99\n"))
    with pytest.raises(QuoteFileError):
        parse_discount_curve(_write(tmp_path, "e.csv", "tenor_years,df\n"))
    with pytest.raises(QuoteFileError):
        parse_discount_curve(_write(tmp_path, "f.csv", "when,df\n1,0.9\n"))


def test_discount_curve_warnings(tmp_path, caplog):
    parse_discount_curve(_write(tmp_path, "a.csv", "tenor_years,df\n1,1.01\n2,1.02\n"))
    assert "above 1" in caplog.text
    assert "not non-increasing" in caplog.text


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_result_round_trip(tmp_path, fmt):
    disc = DiscountCurve.flat(-0.0045, VALUATION)
    res = calibrate_bid_ask(example_quotes()[:4], disc, "wang")
    dates = [tenor_to_maturity(VALUATION, t) for t in ("1Y", "2Y")]
    rf = ResultFile.from_calibration(res, {"note": "x"}, dates)
    assert loads_result(dumps_result(rf, fmt)) == rf
    path = tmp_path / f"r.{fmt}"
    write_result(rf, path)
    back = read_result(path)
    assert back == rf
    assert [p.lam for p in back.pillars] == res.lambdas.tolist()
    assert back.hazard_curve() == res.hazard_curve


def _run(argv, capsys):
    code = run_cli([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_calibrate_synthetic(tmp_path, capsys):
    disc = DiscountCurve.flat(0.0, VALUATION)
    quotes = synthetic_quotes(example_quotes()[:4], disc, [0.003, 0.005, 0.008, 0.012],
                              [0.1, 0.05, 0.04, 0.03], "minmaxvar")
    text = "valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\ntenor,uf_bid,uf_ask\n" + "".join(
        f"{q.tenor},{q.uf_bid!r},{q.uf_ask!r}\n" for q in quotes)
    qpath = _write(tmp_path, "t1.csv", text)
    cpath = _write(tmp_path, "flat.csv", "tenor_years,df\n1.0,1.0\n")
    out = tmp_path / "res.json"
    code, stdout, _ = _run(["calibrate", "--quotes", qpath, "--discount-curve", cpath,
                            "--distortion", "minmaxvar", "--out", out], capsys)
    assert code == 0
    rf = read_result(out)
    assert max(max(abs(p.residual_bid), abs(p.residual_ask)) for p in rf.pillars) < 1e-9
    assert np.allclose([p.gamma for p in rf.pillars], [0.1, 0.05, 0.04, 0.03], rtol=1e-6)
    assert rf.metadata["quotes_sha256"] and rf.metadata["distortion"] == "minmaxvar"
    assert "residual_bid" in stdout


def test_cli_runs_are_deterministic(tmp_path, quote_file, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        assert _run(["calibrate", "--quotes", quote_file, "--flat-rate", "-0.0045", "--distortion", "wang",
                     "--out", out], capsys)[0] == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_bootstrap_and_survival(tmp_path, quote_file, capsys):
    out = tmp_path / "b.json"
    code, _, _ = _run(["bootstrap", "--quotes", quote_file, "--flat-rate", "0", "--out", out,
                       "--survival-dates", "1Y,2025-02-13"], capsys)
    assert code == 0
    rf = read_result(out)
    assert rf.metadata["mode"] == "bootstrap" and len(rf.survival) == 2
    code, stdout, _ = _run(["survival", "--result", out, "--dates", "2021-02-13,5Y"], capsys)
    assert code == 0
    lines = stdout.strip().splitlines()
    assert lines[0] == "date,time,survival" and len(lines) == 3
    value = float(lines[1].split(",")[2])
    assert value == pytest.approx(float(rf.hazard_curve().survival(366 / 365)), rel=1e-9)


def test_cli_price_zero_gamma_collapses(quote_file, capsys):
    code, stdout, _ = _run(["price", "--quotes", quote_file, "--flat-rate", "0", "--lambda", "0.02",
                            "--gamma", "0", "--format", "csv"], capsys)
    assert code == 0
    lines = stdout.strip().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        row = dict(zip(header, line.split(",")))
        assert row["pv"] == row["bid"] == row["ask"]


def test_cli_price_from_result_reproduces_quotes(tmp_path, quote_file, capsys):
    out = tmp_path / "r.json"
    assert _run(["calibrate", "--quotes", quote_file, "--flat-rate", "-0.0045", "--distortion", "wang",
                 "--out", out], capsys)[0] == 0
    code, stdout, _ = _run(["price", "--quotes", quote_file, "--flat-rate", "-0.0045", "--result", out,
                            "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(stdout)
    for row, q in zip(rows, example_quotes()):
        assert row["uf_bid"] == pytest.approx(q.uf_bid, abs=1e-9)
        assert row["uf_ask"] == pytest.approx(q.uf_ask, abs=1e-9)


def test_cli_export_plot(tmp_path, quote_file, capsys):
    out = tmp_path / "r.json"
    _run(["calibrate", "--quotes", quote_file, "--flat-rate", "0", "--out", out], capsys)
    code, stdout, _ = _run(["export-plot", "--result", out, "--quotes", quote_file, "--points", "11"], capsys)
    assert code == 0
    series = [line.split(",")[0] for line in stdout.strip().splitlines()[1:]]
    for name in ("uf_bid", "uf_ask", "calibration_error", "hazard_rate", "gamma"):
        assert name in series
    assert series.count("hazard_rate") == 11


def test_cli_zero_spread_is_assumption_two(tmp_path, capsys):
    p = _write(tmp_path, "q.csv", "valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\n"
               "tenor,uf_bid,uf_ask\n5Y,-0.02,-0.02\n")
    code, _, err = _run(["calibrate", "--quotes", p, "--flat-rate", "0"], capsys)
    assert code == 2
    assert "Assumption 2" in err


def test_cli_unattainable_quote_is_assumption_one(tmp_path, capsys):
    p = _write(tmp_path, "q.csv", "valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\n"
               "tenor,uf_bid,uf_ask\n5Y,0.8,0.9\n")
    out = tmp_path / "partial.json"
    code, _, err = _run(["calibrate", "--quotes", p, "--flat-rate", "0", "--out", out], capsys)
    assert code == 2 and "Assumption 1" in err


def test_cli_partial_result_written(tmp_path, capsys):
    text = EXAMPLE_CSV.replace("3Y,-0.0192,-0.0169", "3Y,-0.0169,-0.0169")
    p = _write(tmp_path, "q.csv", text)
    out = tmp_path / "partial.json"
    code, _, err = _run(["calibrate", "--quotes", p, "--flat-rate", "0", "--out", out], capsys)
    assert code == 2 and "Assumption 2" in err
    rf = read_result(out)
    assert rf.metadata["failed_pillar"] == 3 and len(rf.pillars) == 3


@pytest.mark.parametrize("argv", [
    ["calibrate", "--quotes", "QUOTES", "--bogus"],
    ["calibrate", "--quotes", "QUOTES", "--flat-rate", "0", "--discount-curve", "x.csv"],
    ["calibrate", "--quotes", "QUOTES", "--grid-days", "0"],
    ["price", "--quotes", "QUOTES", "--lambda", "0.01,0.02"],
    ["calibrate", "--quotes", "does-not-exist.csv"],
])
def test_cli_usage_errors(argv, quote_file, capsys):
    argv = [str(quote_file) if a == "QUOTES" else a for a in argv]
    assert _run(argv, capsys)[0] == 2


def test_console_entry_point(quote_file):
    proc = subprocess.run([sys.executable, "-m", "conic_cds", "price", "--quotes", str(quote_file),
                           "--lambda", "0.01", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("tenor,maturity,gamma,pv,bid,ask")
