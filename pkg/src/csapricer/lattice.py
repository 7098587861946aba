"""Recombining Hull-White trinomial short-rate lattice.

The short rate is ``r = alpha(t) + x`` with ``dx = -a x dt + sigma dW``. Slices
sit on every event date of a netting set, with extra slices so that no step
is longer than ``max_dt``. Because steps are uneven, each slice gets its own
node spacing ``sqrt(3 V)`` from the variance of the step that reaches it, and
branching is centred on the node nearest the conditional mean, which keeps
all three probabilities strictly positive.

``alpha`` is fitted slice by slice with forward-induced state prices, so the
lattice reprices every curve discount factor on its slices.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, Iterable, List

import numpy as np

from .curve import ZeroCurve
from .errors import CalibrationError, PricingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatticeConfig:
    mean_reversion: float = 0.03
    sigma: float = 0.01
    max_dt: float = 0.25

    def __post_init__(self):
        if not self.mean_reversion > 0:
            raise ValueError(f"mean reversion must be positive, got {self.mean_reversion}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if not self.max_dt > 0:
            raise ValueError(f"max_dt must be positive, got {self.max_dt}")


@dataclass
class RateLattice:
    times: np.ndarray
    x: List[np.ndarray]
    alphas: np.ndarray
    children: List[np.ndarray]
    probs: List[np.ndarray]
    state_prices: List[np.ndarray]
    config: LatticeConfig
    anchor: date
    slice_of: Dict[date, int] = field(default_factory=dict)

    @property
    def n_slices(self) -> int:
        return len(self.times)

    @property
    def dts(self) -> np.ndarray:
        return np.diff(self.times)

    def slice_index(self, d: date) -> int:
        try:
            return self.slice_of[d]
        except KeyError:
            raise PricingError(f"date {d} is not a lattice slice") from None

    def n_nodes(self, i: int) -> int:
        return len(self.x[i])

    def rates(self, i: int) -> np.ndarray:
        """Short rates on slice ``i`` (not defined on the last slice)."""
        return self.alphas[i] + self.x[i]

    def step_discount(self, i: int) -> np.ndarray:
        return np.exp(-self.rates(i) * (self.times[i + 1] - self.times[i]))

    def expected(self, i: int, values_next: np.ndarray) -> np.ndarray:
        """Undiscounted conditional expectation on slice ``i`` of slice ``i+1`` values."""
        return np.sum(self.probs[i] * values_next[self.children[i]], axis=1)

    def step_back(self, i: int, values_next: np.ndarray) -> np.ndarray:
        return self.step_discount(i) * self.expected(i, values_next)

    def rollback(self, values: np.ndarray, start: int, end: int) -> np.ndarray:
        """Risk-free value on slice ``start`` of ``values`` paid on slice ``end``."""
        if start > end:
            raise ValueError(f"cannot roll back from slice {end} to later slice {start}")
        v = np.asarray(values, dtype=float)
        for i in range(end - 1, start - 1, -1):
            v = self.step_back(i, v)
        return v

    def zero_bond(self, start: int, end: int) -> np.ndarray:
        """Node prices on slice ``start`` of a unit bond maturing on slice ``end``."""
        return self.rollback(np.ones(self.n_nodes(end)), start, end)

    def zero_bond_prices(self) -> np.ndarray:
        """Lattice discount factors from the root, one per slice."""
        return np.array([q.sum() for q in self.state_prices])


def node_step_discount(lattice: RateLattice, i: int, node: int) -> float:
    """exp(-r dt) for one node over the step leaving slice ``i``."""
    if i >= lattice.n_slices - 1:
        raise ValueError(f"slice {i} is the last slice and has no outgoing step")
    return float(lattice.step_discount(i)[node])


def slice_times(event_times: Iterable[float], max_dt: float) -> np.ndarray:
    """Event times plus the origin, each gap split into equal steps <= max_dt."""
    ev = sorted({0.0, *event_times})
    grid = [ev[0]]
    for t0, t1 in zip(ev, ev[1:]):
        n = max(1, int(math.ceil((t1 - t0) / max_dt - 1e-12)))
        grid.extend(t0 + (t1 - t0) * k / n for k in range(1, n))
        grid.append(t1)
    return np.array(grid)


def _branching(x: np.ndarray, dt: float, a: float, sigma: float):
    var = sigma * sigma * (1.0 - math.exp(-2.0 * a * dt)) / (2.0 * a)
    dx = math.sqrt(3.0 * var)
    mean = x * math.exp(-a * dt)
    k = np.rint(mean / dx).astype(np.int64)
    eta = mean - k * dx
    pu = (var + eta ** 2) / (2 * dx * dx) + eta / (2 * dx)
    pd = (var + eta ** 2) / (2 * dx * dx) - eta / (2 * dx)
    pm = 1.0 - pu - pd
    probs = np.column_stack([pd, pm, pu])
    if np.any(probs < 0.0):
        raise CalibrationError(
            f"negative branching probability on a {dt:.4f}y step; reduce max_dt"
        )
    lo = int(k.min()) - 1
    hi = int(k.max()) + 1
    next_x = np.arange(lo, hi + 1) * dx
    children = np.column_stack([k - 1 - lo, k - lo, k + 1 - lo])
    return next_x, children, probs


def build_lattice(
    curve: ZeroCurve,
    cfg: LatticeConfig,
    horizon: date,
    payment_dates: Iterable[date] = (),
) -> RateLattice:
    """Build and calibrate a lattice whose slices include every payment date."""
    dates = sorted(set(payment_dates) | {horizon})
    for d in dates:
        if d < curve.anchor:
            raise PricingError(f"event date {d} precedes curve anchor {curve.anchor}")
        if d > horizon:
            raise PricingError(f"event date {d} is after the lattice horizon {horizon}")
    event_times = {d: curve.time(d) for d in dates}
    times = slice_times(event_times.values(), cfg.max_dt)

    a, sigma = cfg.mean_reversion, cfg.sigma
    n = len(times)
    xs: List[np.ndarray] = [np.zeros(1)]
    children: List[np.ndarray] = []
    probs: List[np.ndarray] = []
    for i in range(n - 1):
        dt = times[i + 1] - times[i]
        if sigma == 0.0:
            xs.append(np.zeros(1))
            children.append(np.zeros((1, 3), dtype=np.int64))
            probs.append(np.tile([0.0, 1.0, 0.0], (1, 1)))
            continue
        next_x, ch, pr = _branching(xs[i], dt, a, sigma)
        xs.append(next_x)
        children.append(ch)
        probs.append(pr)

    target = curve.df_time(times)
    alphas = np.zeros(max(n - 1, 0))
    q_list: List[np.ndarray] = [np.ones(1)]
    for i in range(n - 1):
        dt = times[i + 1] - times[i]
        q = q_list[i]
        s = float(np.sum(q * np.exp(-xs[i] * dt)))
        alphas[i] = math.log(s / target[i + 1]) / dt
        contrib = q * np.exp(-(alphas[i] + xs[i]) * dt)
        q_next = np.zeros(len(xs[i + 1]))
        np.add.at(q_next, children[i], contrib[:, None] * probs[i])
        q_list.append(q_next)

    slice_of = {}
    for d, t in event_times.items():
        idx = int(np.argmin(np.abs(times - t)))
        slice_of[d] = idx
    slice_of[curve.anchor] = 0

    logger.debug("lattice: %d slices, max %d nodes", n, max(len(v) for v in xs))
    return RateLattice(
        times=times,
        x=xs,
        alphas=alphas,
        children=children,
        probs=probs,
        state_prices=q_list,
        config=cfg,
        anchor=curve.anchor,
        slice_of=slice_of,
    )


def calibration_errors(lattice: RateLattice, curve: ZeroCurve) -> np.ndarray:
    return lattice.zero_bond_prices() - curve.df_time(lattice.times)
