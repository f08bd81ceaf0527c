import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conic_cds import BidAskCalibrator, DiscountCurve, MidQuoteBootstrapper, calibrate_bid_ask
from conic_cds.calibrator import MarketQuote
from conic_cds.io import parse_quotes

from conftest import VALUATION, example_quotes

EUR = DiscountCurve.flat(-0.0045, VALUATION)


def test_get_params_and_clone():
    est = BidAskCalibrator(distortion="wang", grid_days=2)
    params = est.get_params()
    assert params["distortion"] == "wang" and params["grid_days"] == 2
    twin = clone(est)
    assert twin.get_params() == params and not hasattr(twin, "result_")
    est.set_params(curve_form="linear")
    assert est.curve_form == "linear"


def test_predict_before_fit_raises():
    with pytest.raises(NotFittedError):
        MidQuoteBootstrapper().predict([1.0])
    with pytest.raises(NotFittedError):
        BidAskCalibrator().liquidity([1.0])


def test_calibrator_matches_functional_api(quote_file):
    qf = parse_quotes(quote_file)
    est = BidAskCalibrator(distortion="wang").fit(qf, EUR)
    ref = calibrate_bid_ask(example_quotes(), EUR, "wang")
    assert np.array_equal(est.lambdas_, ref.lambdas)
    assert np.array_equal(est.gammas_, ref.gammas)
    t = np.linspace(0.0, 10.0, 21)
    assert np.array_equal(est.predict(t), ref.hazard_curve.survival(t))
    assert np.allclose(est.default_probability(t), 1.0 - est.predict(t))
    assert est.liquidity(est.pillar_times_[5]) == pytest.approx(ref.gammas[5])
    quoted = est.transform(qf)
    assert quoted.shape == (8, 2)
    assert np.allclose(quoted, [[q.uf_bid, q.uf_ask] for q in qf.quotes], atol=1e-9)


def test_bootstrapper_fit_predict():
    est = MidQuoteBootstrapper().fit(example_quotes(), EUR)
    assert est.n_pillars_ == 8 and np.all(est.gammas_ == 0)
    ps = est.predict([0.0, 1.0, 5.0])
    assert ps[0] == 1.0 and ps[1] > ps[2]
    assert est.hazard_rate(0.1) == pytest.approx(est.lambdas_[0])


def test_input_validation():
    q = example_quotes()
    with pytest.raises(ValueError):
        BidAskCalibrator().fit([], EUR)
    with pytest.raises(TypeError):
        BidAskCalibrator().fit([("6M", -0.003, -0.002)], EUR)
    with pytest.raises(ValueError):
        BidAskCalibrator().fit([q[0], q[0]], EUR)
    with pytest.raises(ValueError):
        BidAskCalibrator().fit([MarketQuote(q[0].maturity, -0.002, -0.003)], EUR)
    with pytest.raises(ValueError):
        BidAskCalibrator().fit(q, DiscountCurve.flat(0.0))
    with pytest.raises(TypeError):
        BidAskCalibrator().fit(q, 0.01)
    est = MidQuoteBootstrapper().fit(q[:2], EUR)
    with pytest.raises(ValueError):
        est.predict([-1.0])


def test_unsorted_quotes_are_sorted():
    q = example_quotes()[:3]
    a = BidAskCalibrator().fit(q[::-1], EUR)
    b = BidAskCalibrator().fit(q, EUR)
    assert np.array_equal(a.lambdas_, b.lambdas_)
