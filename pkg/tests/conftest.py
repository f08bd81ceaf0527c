from datetime import date

import pytest

from conic_cds import DiscountCurve, MarketQuote, tenor_to_maturity

VALUATION = date(2020, 2, 13)

# bid, ask upfronts as fractions of notional; recovery 40%, coupon 1%
EXAMPLE_QUOTES = [
    ("6M", -0.0033, -0.0026),
    ("1Y", -0.0074, -0.0068),
    ("2Y", -0.0149, -0.0126),
    ("3Y", -0.0192, -0.0169),
    ("4Y", -0.0221, -0.0198),
    ("5Y", -0.0219, -0.0198),
    ("7Y", -0.0162, -0.0095),
    ("10Y", -0.0073, 0.0047),
]
EXAMPLE_RELATIVE_SPREAD = {
    "6M": 0.2373, "1Y": 0.0845, "2Y": 0.1673, "3Y": 0.1274,
    "4Y": 0.1098, "5Y": 0.1007, "7Y": 0.5214, "10Y": 9.3208,
}


def example_quotes(valuation=VALUATION):
    return [MarketQuote(tenor_to_maturity(valuation, t), b, a, coupon=0.01, recovery=0.4, tenor=t)
            for t, b, a in EXAMPLE_QUOTES]


EXAMPLE_CSV = "valuation_date=2020-02-13\nrecovery=0.4\ncoupon=0.01\ntenor,uf_bid,uf_ask\n" + "".join(
    f"{t},{b},{a}\n" for t, b, a in EXAMPLE_QUOTES)


@pytest.fixture
def quotes():
    return example_quotes()


@pytest.fixture
def unit_curve():
    return DiscountCurve.flat(0.0, VALUATION)


@pytest.fixture
def quote_file(tmp_path):
    p = tmp_path / "quotes.csv"
    p.write_text(EXAMPLE_CSV)
    return p


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
