"""Discrete Choquet integration and conic bid/ask prices of CDS contracts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import DiscountCurve, HazardCurve
from .distortion import Distortion, distort
from .pricer import CdsContract, DefaultGrid, DeferredPayoff, LegTag, default_grid, deferred_payoff


@dataclass(frozen=True, eq=False)
class DistortedCellMeasure:
    """Distorted measure on a cell partition, stored as time-ordered tail masses.

    ``tail_probs[i]`` is the Q-mass of cells ``i, i+1, ...``; it starts at 1
    and is non-increasing.
    """

    tail_probs: np.ndarray
    distortion: Distortion

    def __post_init__(self):
        tails = np.asarray(self.tail_probs, dtype=float)
        if tails.ndim != 1 or tails.size == 0:
            raise ValueError("tail probabilities must be a non-empty vector")
        if abs(tails[0] - 1.0) > 1e-12 or np.any(np.diff(tails) > 1e-15) or tails[-1] < -1e-15:
            raise ValueError("tail probabilities must start at 1 and be non-increasing")
        object.__setattr__(self, "tail_probs", tails)

    @classmethod
    def from_masses(cls, masses, distortion: Distortion) -> "DistortedCellMeasure":
        masses = np.asarray(masses, dtype=float)
        tails = np.cumsum(masses[::-1])[::-1]
        tails[0] = 1.0
        return cls(np.minimum(tails, 1.0), distortion)

    @classmethod
    def from_hazard(cls, grid: DefaultGrid, h: HazardCurve, distortion: Distortion):
        return cls.from_masses(grid.cell_masses(h), distortion)

    @property
    def masses(self) -> np.ndarray:
        return self.tail_probs - np.append(self.tail_probs[1:], 0.0)

    @property
    def n_cells(self) -> int:
        return self.tail_probs.size


def _sorted_tails(masses: np.ndarray, order: np.ndarray) -> np.ndarray:
    tails = np.cumsum(masses[order][::-1])[::-1]
    tails[0] = 1.0
    return np.clip(tails, 0.0, 1.0)


def choquet_integral(payoff, m: DistortedCellMeasure) -> float:
    """Sorted-increment approximation of the Choquet integral.

    Cells are sorted by payoff value (stable, so ties keep their cell
    order); each increment over the previous value, starting from zero,
    is weighted by the distorted mass of the cells at or above it.
    """
    values = payoff.values if isinstance(payoff, DeferredPayoff) else np.asarray(payoff, dtype=float)
    if values.shape != (m.n_cells,):
        raise ValueError(f"payoff has {values.size} cells but the measure has {m.n_cells}")
    order = np.argsort(values, kind="stable")
    xs = values[order]
    increments = np.diff(xs, prepend=0.0)
    tails = _sorted_tails(m.masses, order)
    return float(np.dot(increments, distort(m.distortion, tails)))


class _SignedPayoff:
    """A payoff vector with its sort order cached; the order never depends on the measure."""

    __slots__ = ("values", "order", "increments")

    def __init__(self, values: np.ndarray):
        self.values = values
        self.order = np.argsort(values, kind="stable")
        self.increments = np.diff(values[self.order], prepend=0.0)

    def tails(self, masses: np.ndarray) -> np.ndarray:
        return _sorted_tails(masses, self.order)


class LegTails:
    """Sorted tail masses of the four signed leg payoffs under one hazard curve.

    Built once per hazard curve; :meth:`bid_ask` then costs one distortion
    evaluation per leg, which is what the inner spread solve iterates on.
    """

    def __init__(self, pricer: "ConicCdsPricer", masses: np.ndarray):
        self.pricer = pricer
        self.masses = masses
        self._tails = [p.tails(masses) for p in pricer._signed]
        self.pv = pricer.df_maturity * float(
            np.dot(pricer._signed[0].values - pricer._signed[2].values, masses))

    def _integral(self, k: int, d: Distortion) -> float:
        return float(np.dot(self.pricer._signed[k].increments, distort(d, self._tails[k])))

    def ask(self, d: Distortion) -> float:
        if d.gamma == 0.0:
            return self.pv
        return self.pricer.df_maturity * (self._integral(0, d) + self._integral(3, d))

    def bid(self, d: Distortion) -> float:
        if d.gamma == 0.0:
            return self.pv
        return -self.pricer.df_maturity * (self._integral(1, d) + self._integral(2, d))

    def bid_ask(self, d: Distortion) -> tuple[float, float]:
        return self.bid(d), self.ask(d)

    def spread(self, d: Distortion) -> float:
        bid, ask = self.bid_ask(d)
        return ask - bid


class ConicCdsPricer:
    """Bid, ask and risk-neutral value of one contract on a fixed default grid.

    The leg payoffs depend only on the schedule and the discount curve, so
    they are built and sorted once; each hazard curve then only changes the
    cell masses.
    """

    def __init__(self, c: CdsContract, disc: DiscountCurve, step_days: int = 1, point: str = "mid"):
        self.contract = c
        self.grid = default_grid(c.schedule, step_days, point)
        prot = deferred_payoff(c, disc, self.grid, LegTag.PROT)
        prem = deferred_payoff(c, disc, self.grid, LegTag.PREM)
        self.df_maturity = prot.df_maturity
        self.prot = prot
        self.prem = prem
        # order matters: +prot, -prot, +prem, -prem
        self._signed = [_SignedPayoff(v) for v in (prot.values, -prot.values, prem.values, -prem.values)]

    def tails(self, h: HazardCurve) -> LegTails:
        return LegTails(self, self.grid.cell_masses(h))

    def pv(self, h: HazardCurve) -> float:
        masses = self.grid.cell_masses(h)
        return self.df_maturity * float(np.dot(self.prot.values - self.prem.values, masses))

    def bid(self, h: HazardCurve, d: Distortion) -> float:
        return self.tails(h).bid(d)

    def ask(self, h: HazardCurve, d: Distortion) -> float:
        return self.tails(h).ask(d)


def bid_price(c: CdsContract, disc: DiscountCurve, h: HazardCurve, d: Distortion,
              step_days: int = 1, point: str = "mid") -> float:
    """Bid of the deferred CDS payoff: protection bid less premium ask."""
    grid = default_grid(c.schedule, step_days, point)
    prot = deferred_payoff(c, disc, grid, LegTag.PROT)
    prem = deferred_payoff(c, disc, grid, LegTag.PREM)
    m = DistortedCellMeasure.from_hazard(grid, h, d)
    return -prot.df_maturity * (choquet_integral(-prot.values, m) + choquet_integral(prem.values, m))


def ask_price(c: CdsContract, disc: DiscountCurve, h: HazardCurve, d: Distortion,
              step_days: int = 1, point: str = "mid") -> float:
    """Ask of the deferred CDS payoff: protection ask less premium bid."""
    grid = default_grid(c.schedule, step_days, point)
    prot = deferred_payoff(c, disc, grid, LegTag.PROT)
    prem = deferred_payoff(c, disc, grid, LegTag.PREM)
    m = DistortedCellMeasure.from_hazard(grid, h, d)
    return prot.df_maturity * (choquet_integral(prot.values, m) + choquet_integral(-prem.values, m))
