"""Discount-factor curve and piecewise hazard-rate curve."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from datetime import date

import numpy as np

LAMBDA_MIN = 1e-10
LAMBDA_MAX = 10.0


class CurveForm(enum.Enum):
    PIECEWISE_CONSTANT = "const"
    PIECEWISE_LINEAR = "linear"


def _check_times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("curve times must be non-negative")
    return arr


def _as_output(arr, scalar_input):
    return float(arr) if scalar_input else arr


@dataclass(frozen=True)
class DiscountCurve:
    """Log-linear interpolation on discount factors, flat forward beyond the last node.

    ``times`` are years from ``valuation``; the node (0, 1) is implicit.
    """

    times: tuple[float, ...]
    dfs: tuple[float, ...]
    valuation: date | None = None
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _logdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        dfs = np.asarray(self.dfs, dtype=float)
        if times.ndim != 1 or times.size == 0 or times.size != dfs.size:
            raise ValueError("discount curve needs equal-length, non-empty times and dfs")
        if np.any(dfs <= 0) or not np.all(np.isfinite(dfs)):
            raise ValueError("discount factors must be positive and finite")
        if np.any(np.diff(times) <= 0) or times[0] < 0:
            raise ValueError("discount node times must be non-negative and strictly increasing")
        if times[0] == 0.0:
            if dfs[0] != 1.0:
                raise ValueError("DF(0) must equal 1")
            times, dfs = times[1:], dfs[1:]
        t = np.concatenate([[0.0], times])
        logdf = np.concatenate([[0.0], np.log(dfs)])
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_logdf", logdf)

    @classmethod
    def flat(cls, rate: float = 0.0, valuation: date | None = None, horizon: float = 50.0):
        """Continuously-compounded flat curve; ``rate=0`` gives DF identically 1."""
        return cls((horizon,), (math.exp(-rate * horizon),), valuation)

    def df(self, t):
        scalar = np.ndim(t) == 0
        t = _check_times(t)
        out = np.interp(t, self._t, self._logdf)
        if self._t.size > 1:
            last_fwd = (self._logdf[-1] - self._logdf[-2]) / (self._t[-1] - self._t[-2])
            beyond = t > self._t[-1]
            if np.any(beyond):
                out = np.where(beyond, self._logdf[-1] + last_fwd * (t - self._t[-1]), out)
        return _as_output(np.exp(out), scalar)

    __call__ = df


@dataclass(frozen=True)
class HazardCurve:
    """Piecewise hazard rate with closed-form survival probabilities.

    For the constant form, ``lambdas[i]`` applies on ``(knots[i-1], knots[i]]``
    and the last rate extends beyond the last knot. For the linear form the
    first segment is flat at ``lambdas[0]``, interior segments interpolate
    linearly between consecutive pillars, and the last segment is flat at
    ``lambdas[-1]``.
    """

    knot_times: tuple[float, ...]
    lambdas: tuple[float, ...]
    form: CurveForm = CurveForm.PIECEWISE_CONSTANT
    _seg: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = np.asarray(self.knot_times, dtype=float)
        lam = np.asarray(self.lambdas, dtype=float)
        if knots.ndim != 1 or knots.size == 0 or knots.size != lam.size:
            raise ValueError("hazard curve needs equal-length, non-empty knots and lambdas")
        if knots[0] <= 0 or np.any(np.diff(knots) <= 0):
            raise ValueError("hazard knot times must be positive and strictly increasing")
        if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise ValueError("hazard rates must be positive and finite")
        object.__setattr__(self, "knot_times", tuple(float(x) for x in knots))
        object.__setattr__(self, "lambdas", tuple(float(x) for x in lam))
        object.__setattr__(self, "form", CurveForm(self.form))
        object.__setattr__(self, "_seg", self._segments(knots, lam))

    def _segments(self, knots, lam):
        # Segment k covers (starts[k], ends[k]] with rate going v0[k] -> v1[k];
        # the final segment is flat and unbounded.
        k = knots.size
        starts = np.concatenate([[0.0], knots[:-1]])
        ends = knots.copy()
        if self.form is CurveForm.PIECEWISE_CONSTANT or k <= 2:
            v0 = lam.copy()
            v1 = lam.copy()
        else:
            v0 = np.concatenate([[lam[0]], lam[:-2], [lam[-1]]])
            v1 = np.concatenate([lam[:-1], [lam[-1]]])
        widths = ends - starts
        areas = 0.5 * (v0 + v1) * widths
        cum = np.concatenate([[0.0], np.cumsum(areas)])
        return starts, ends, v0, v1, cum

    @property
    def n_pillars(self) -> int:
        return len(self.lambdas)

    def _locate(self, t):
        starts, ends, _, _, _ = self._seg
        idx = np.searchsorted(ends, t, side="left")
        return np.minimum(idx, ends.size - 1)

    def hazard_rate(self, t):
        scalar = np.ndim(t) == 0
        t = _check_times(t)
        starts, ends, v0, v1, _ = self._seg
        idx = self._locate(t)
        frac = np.clip((t - starts[idx]) / (ends[idx] - starts[idx]), 0.0, 1.0)
        last = idx == ends.size - 1
        rate = np.where(last, v1[idx], v0[idx] + (v1[idx] - v0[idx]) * frac)
        return _as_output(rate, scalar)

    def intensity_integral(self, t):
        """Cumulative hazard from 0 to ``t``."""
        scalar = np.ndim(t) == 0
        t = _check_times(t)
        starts, ends, v0, v1, cum = self._seg
        idx = self._locate(t)
        dt = t - starts[idx]
        width = ends[idx] - starts[idx]
        last = idx == ends.size - 1
        slope = np.where(last, 0.0, (v1[idx] - v0[idx]) / width)
        rate0 = np.where(last, v1[idx], v0[idx])
        out = cum[idx] + rate0 * dt + 0.5 * slope * dt * dt
        return _as_output(out, scalar)

    def survival(self, t):
        scalar = np.ndim(t) == 0
        out = np.exp(-np.asarray(self.intensity_integral(t)))
        return _as_output(out, scalar)

    __call__ = survival

    def bump_pillar(self, i: int, new_lambda: float) -> "HazardCurve":
        """Copy of the curve with pillar ``i`` (0-based) set to ``new_lambda``."""
        if not 0 <= i < self.n_pillars:
            raise IndexError(f"pillar index {i} out of range for {self.n_pillars} pillars")
        if not new_lambda > 0:
            raise ValueError(f"hazard rate must be positive, got {new_lambda}")
        lam = list(self.lambdas)
        lam[i] = float(new_lambda)
        return replace(self, lambdas=tuple(lam))

    @classmethod
    def flat(cls, rate: float, horizon: float = 50.0) -> "HazardCurve":
        return cls((horizon,), (rate,))
