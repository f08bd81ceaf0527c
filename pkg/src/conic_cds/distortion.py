"""Concave distortion families used to price bid and ask."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

GAMMA_MAX = 50.0


class DistortionFamily(enum.Enum):
    MINMAXVAR = "minmaxvar"
    WANG = "wang"


@dataclass(frozen=True)
class Distortion:
    family: DistortionFamily
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", DistortionFamily(self.family))
        if not self.gamma >= 0:
            raise ValueError(f"distortion parameter must be >= 0, got {self.gamma}")

    def __call__(self, x):
        return distort(self, x)

    def with_gamma(self, gamma: float) -> "Distortion":
        return Distortion(self.family, gamma)


def _check_prob(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(np.isnan(arr)):
        raise ValueError("distortion argument must lie in [0, 1]")
    return arr


def _apply(d: Distortion, x: np.ndarray) -> np.ndarray:
    g = d.gamma
    if g == 0.0:
        return x.copy()
    if d.family is DistortionFamily.MINMAXVAR:
        p = 1.0 + g
        return 1.0 - (1.0 - x ** (1.0 / p)) ** p
    # ndtri(0) = -inf and ndtri(1) = +inf give the endpoint limits 0 and 1
    with np.errstate(invalid="ignore"):
        return ndtr(ndtri(x) + g)


def distort(d: Distortion, x):
    """psi_gamma(x) for the family of ``d``; vectorised over ``x``."""
    scalar = np.ndim(x) == 0
    out = _apply(d, _check_prob(x))
    return float(out) if scalar else out


def dual_distort(d: Distortion, x):
    """Dual distortion ``1 - psi(1 - x)``."""
    scalar = np.ndim(x) == 0
    arr = _check_prob(x)
    if d.gamma == 0.0:
        out = arr.copy()
    elif d.family is DistortionFamily.WANG:
        # 1 - Phi(Phi^-1(1 - x) + g) == Phi(Phi^-1(x) - g), without the cancellation
        with np.errstate(invalid="ignore"):
            out = ndtr(ndtri(arr) - d.gamma)
    else:
        out = 1.0 - _apply(d, 1.0 - arr)
    return float(out) if scalar else out
