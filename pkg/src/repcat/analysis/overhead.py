"""Smallest repetition cat code meeting a target logical error rate per cycle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..error_model import Strategy, bitflip_fast, bitflip_slow, logical_bitflip
from .fitting import FitResult, ansatz

ALPHA_SQ_GRID = tuple(range(4, 21))
DISTANCE_GRID = tuple(range(3, 60, 2))


@dataclass(frozen=True)
class OverheadQuery:
    eta: float
    epsilon_l: float
    strategy: Strategy
    theta: int = 1

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if not self.epsilon_l > 0:
            raise ValueError("target logical error rate must be > 0")


@dataclass(frozen=True)
class OverheadPoint:
    query: OverheadQuery
    reachable: bool
    d: int | None = None
    alpha_sq: float | None = None
    total_cat_qubits: int | None = None
    p_zl: float | None = None
    p_xl: float | None = None
    reason: str = ""

    @property
    def above_threshold(self) -> bool:
        return self.reason == "above threshold"

    def to_dict(self) -> dict:
        q = self.query
        return {
            "eta": q.eta, "epsilon_l": q.epsilon_l, "strategy": q.strategy.value, "theta": q.theta,
            "reachable": self.reachable, "d": self.d, "alpha_sq": self.alpha_sq,
            "total_cat_qubits": self.total_cat_qubits, "p_zl": self.p_zl, "p_xl": self.p_xl,
            "reason": self.reason,
        }


class FitGrid:
    """Threshold fits at several photon numbers for one (strategy, theta).

    Between fitted photon numbers, log a, c and log x_th are interpolated
    linearly; outside the fitted range no prediction is made.
    """

    def __init__(self, strategy, fits: dict, theta: int = 1):
        if not fits:
            raise ValueError("need at least one fit")
        self.strategy = Strategy.parse(strategy)
        self.theta = int(theta)
        self.fits = {float(k): v for k, v in sorted(fits.items())}
        variants = {f.exponent_variant for f in self.fits.values()}
        if len(variants) != 1:
            raise ValueError("all fits in a grid must share one exponent variant")
        self.variant = variants.pop()
        self._alpha = np.array(list(self.fits))
        self._log_a = np.log([f.a for f in self.fits.values()])
        self._c = np.array([f.c for f in self.fits.values()])
        self._log_th = np.log([f.x_th for f in self.fits.values()])

    @property
    def alpha_range(self) -> tuple[float, float]:
        return float(self._alpha[0]), float(self._alpha[-1])

    def covers(self, alpha_sq: float) -> bool:
        lo, hi = self.alpha_range
        return lo - 1e-9 <= alpha_sq <= hi + 1e-9

    def parameters(self, alpha_sq: float) -> tuple[float, float, float]:
        if not self.covers(alpha_sq):
            raise ValueError(f"alpha_sq={alpha_sq} outside fitted range {self.alpha_range}")
        a = math.exp(np.interp(alpha_sq, self._alpha, self._log_a))
        c = float(np.interp(alpha_sq, self._alpha, self._c))
        th = math.exp(np.interp(alpha_sq, self._alpha, self._log_th))
        return a, c, th

    def p_zl(self, eta: float, d: int, alpha_sq: float) -> float:
        a, c, th = self.parameters(alpha_sq)
        return float(ansatz(eta, d, a, c, th, self.variant))

    def threshold(self, alpha_sq: float) -> float:
        return self.parameters(alpha_sq)[2]

    def to_dict(self) -> dict:
        return {"strategy": self.strategy.value, "theta": self.theta,
                "fits": {str(k): v.to_dict() for k, v in self.fits.items()}}

    @classmethod
    def from_dict(cls, data: dict) -> "FitGrid":
        fits = {float(k): FitResult.from_dict(v) for k, v in data["fits"].items()}
        return cls(data["strategy"], fits, data.get("theta", 1))


def bit_flip_per_cycle(strategy: Strategy, d: int, alpha_sq: float, eta: float) -> float:
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.PHENOMENOLOGICAL:
        return 0.0
    p_x = bitflip_fast(alpha_sq) if strategy.is_fast else bitflip_slow(alpha_sq, eta)
    return logical_bitflip(d, p_x)


def optimize_overhead(query: OverheadQuery, grid: FitGrid, alpha_grid=ALPHA_SQ_GRID,
                      d_grid=DISTANCE_GRID) -> OverheadPoint:
    """Minimum 2d-1 over (d, alpha_sq) with p_zl + p_xl <= epsilon_l.

    Ties in qubit count go to the smaller photon number.  Photon numbers
    outside the grid's fitted range are skipped.
    """
    if grid.strategy is not query.strategy or grid.theta != query.theta:
        raise ValueError("fit grid does not match the query's strategy and theta")
    alphas = [a for a in alpha_grid if grid.covers(a)]
    if not alphas:
        raise ValueError(f"no photon number of the scan grid lies in {grid.alpha_range}")
    if all(query.eta >= grid.threshold(a) for a in alphas):
        return OverheadPoint(query, reachable=False, reason="above threshold")
    for d in sorted(d for d in d_grid if d % 2 == 1):
        for a in sorted(alphas):
            p_zl = grid.p_zl(query.eta, d, a)
            p_xl = bit_flip_per_cycle(query.strategy, d, a, query.eta)
            if p_zl + p_xl <= query.epsilon_l:
                return OverheadPoint(query, reachable=True, d=d, alpha_sq=float(a),
                                     total_cat_qubits=2 * d - 1, p_zl=p_zl, p_xl=p_xl)
    return OverheadPoint(query, reachable=False, reason="target not met within the scanned grid")


def overhead_curve(etas, epsilon_l: float, grid: FitGrid, **kw) -> list[OverheadPoint]:
    return [optimize_overhead(OverheadQuery(e, epsilon_l, grid.strategy, grid.theta), grid, **kw)
            for e in etas]
