"""Input checks shared by the estimators."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .calibrator import MarketQuote
from .curves import DiscountCurve


def check_quotes(quotes, two_price: bool = True) -> list[MarketQuote]:
    """Validated quotes sorted by maturity; accepts a QuoteFile or an iterable of MarketQuote."""
    items: Iterable = getattr(quotes, "quotes", quotes)
    out = list(items)
    if not out:
        raise ValueError("at least one quote is required")
    for q in out:
        if not isinstance(q, MarketQuote):
            raise TypeError(f"expected MarketQuote, got {type(q).__name__}")
        if not (np.isfinite(q.uf_bid) and np.isfinite(q.uf_ask)):
            raise ValueError(f"non-finite upfront for {q.tenor or q.maturity}")
        if two_price and not q.uf_bid < q.uf_ask:
            raise ValueError(f"bid must be strictly below ask for {q.tenor or q.maturity}")
        if not 0 <= q.recovery < 1:
            raise ValueError(f"recovery must lie in [0, 1) for {q.tenor or q.maturity}")
    out.sort(key=lambda q: q.maturity)
    mats = [q.maturity for q in out]
    if len(set(mats)) != len(mats):
        raise ValueError("duplicate maturities in quotes")
    return out


def check_discount_curve(curve) -> DiscountCurve:
    if not isinstance(curve, DiscountCurve):
        raise TypeError(f"expected DiscountCurve, got {type(curve).__name__}")
    if curve.valuation is None:
        raise ValueError("discount curve must carry a valuation date")
    return curve


def check_times(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if arr.ndim > 1:
        arr = arr.ravel()
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("times must be finite and non-negative")
    return arr
