"""Deterministic hazard-rate term structures calibrated to CDS quotes.

Hazards are piecewise constant between CDS tenors and flat beyond the last
one. Times are ACT/365F years from the anchor, the same axis the discount
curve uses.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .curve import TIME_BASIS, ZeroCurve
from .dates import year_fraction
from .errors import CalibrationError, InputError

logger = logging.getLogger(__name__)

PREMIUM_PERIOD = 0.25


@dataclass(frozen=True)
class CdsQuote:
    tenor: float
    spread: float

    def __post_init__(self):
        if self.tenor <= 0:
            raise InputError(f"CDS tenor must be positive, got {self.tenor}")
        if self.spread < 0:
            raise InputError(f"CDS spread must be non-negative, got {self.spread} at {self.tenor}y")


def _check_recovery(recovery: float) -> None:
    if not 0.0 <= recovery < 1.0:
        raise ValueError(f"recovery must be in [0, 1), got {recovery}")


@dataclass(frozen=True)
class HazardCurve:
    """Piecewise-constant hazard ``hazards[i]`` on ``(times[i-1], times[i]]``."""
    anchor: date
    times: Tuple[float, ...]
    hazards: Tuple[float, ...]
    recovery: float

    def __post_init__(self):
        _check_recovery(self.recovery)
        if len(self.times) != len(self.hazards):
            raise ValueError(f"got {len(self.times)} segment ends for {len(self.hazards)} hazards")
        if any(t1 <= t0 for t0, t1 in zip((0.0,) + tuple(self.times), self.times)):
            raise ValueError(f"hazard segment ends must be positive and increasing, got {self.times}")
        if any(h < 0 for h in self.hazards):
            raise ValueError(f"hazard rates must be non-negative, got {self.hazards}")

    @classmethod
    def flat(cls, anchor: date, hazard: float, recovery: float, horizon: float = 100.0) -> "HazardCurve":
        return cls(anchor, (horizon,), (hazard,), recovery)

    @classmethod
    def zero(cls, anchor: date, recovery: float = 0.0) -> "HazardCurve":
        return cls(anchor, (), (), recovery)

    def cumulative_hazard(self, t):
        """Integrated hazard from the anchor to model time ``t``."""
        t_arr = np.asarray(t, dtype=float)
        if not self.times:
            return np.zeros_like(t_arr)
        knots = np.concatenate(([0.0], self.times))
        h = np.asarray(self.hazards)
        cum = np.concatenate(([0.0], np.cumsum(h * np.diff(knots))))
        inside = np.interp(t_arr, knots, cum)
        return np.where(t_arr > knots[-1], cum[-1] + h[-1] * (t_arr - knots[-1]), inside)

    def survival_time(self, t1, t2):
        return np.exp(-(self.cumulative_hazard(t2) - self.cumulative_hazard(t1)))

    def time(self, d: date) -> float:
        if d < self.anchor:
            raise ValueError(f"date {d} precedes hazard curve anchor {self.anchor}")
        return year_fraction(self.anchor, d, TIME_BASIS)

    @property
    def is_risk_free(self) -> bool:
        return not any(self.hazards)

    def segment_table(self) -> List[Dict[str, float]]:
        starts = (0.0,) + tuple(self.times[:-1])
        return [{"start": s, "end": e, "hazard": h} for s, e, h in zip(starts, self.times, self.hazards)]


def survival_prob(hc: HazardCurve, t: date, s: date) -> float:
    """p(t, s): probability of no default in (t, s]."""
    if s < t:
        raise ValueError(f"end date {s} precedes start date {t}")
    return float(hc.survival_time(hc.time(t), hc.time(s)))


def default_prob(hc: HazardCurve, t: date, s: date) -> float:
    return 1.0 - survival_prob(hc, t, s)


def _premium_grid(tenor: float) -> np.ndarray:
    n = int(math.ceil(tenor / PREMIUM_PERIOD - 1e-9))
    grid = np.minimum(np.arange(n + 1) * PREMIUM_PERIOD, tenor)
    return grid


def cds_legs(hc: HazardCurve, tenor: float, curve: ZeroCurve) -> Tuple[float, float]:
    """(risky annuity, protection leg PV) per unit notional on a quarterly grid."""
    grid = _premium_grid(tenor)
    surv = hc.survival_time(0.0, grid)
    dfs = curve.df_time(grid[1:])
    annuity = float(np.sum(np.diff(grid) * dfs * surv[1:]))
    protection = float((1.0 - hc.recovery) * np.sum(dfs * (surv[:-1] - surv[1:])))
    return annuity, protection


def par_cds_spread(hc: HazardCurve, tenor: float, curve: ZeroCurve) -> float:
    """Spread equating the premium leg and the protection leg."""
    if tenor <= 0:
        raise ValueError(f"CDS tenor must be positive, got {tenor}")
    annuity, protection = cds_legs(hc, tenor, curve)
    if annuity == 0.0:
        raise ValueError(f"risky annuity is zero for tenor {tenor}")
    return protection / annuity


def bootstrap_hazards(
    quotes: Sequence[CdsQuote],
    recovery: float,
    curve: ZeroCurve,
    xtol: float = 1e-16,
) -> HazardCurve:
    """Sequentially solve one hazard per quoted tenor."""
    _check_recovery(recovery)
    if not quotes:
        return HazardCurve.zero(curve.anchor, recovery)
    tenors = [q.tenor for q in quotes]
    if any(b <= a for a, b in zip(tenors, tenors[1:])):
        raise InputError(f"CDS tenors must be strictly increasing, got {tenors}")

    hazards: List[float] = []
    for q in quotes:
        def residual(h: float) -> float:
            trial = HazardCurve(curve.anchor, tuple(tenors[: len(hazards) + 1]), tuple(hazards) + (h,), recovery)
            return par_cds_spread(trial, q.tenor, curve) - q.spread

        f0 = residual(0.0)
        if f0 >= -1e-15:
            if f0 > 1e-13:
                raise CalibrationError(
                    f"CDS quote {q.spread} at {q.tenor}y implies a negative hazard rate"
                )
            hazards.append(0.0)
            continue
        hi = max(1.0, 10.0 * q.spread / (1.0 - recovery))
        if residual(hi) < 0.0:
            raise CalibrationError(f"hazard root not bracketed for CDS tenor {q.tenor}y (spread {q.spread})")
        hazards.append(brentq(residual, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200))
    logger.debug("calibrated hazards %s", hazards)
    return HazardCurve(curve.anchor, tuple(tenors), tuple(hazards), recovery)


@dataclass(frozen=True)
class Counterparty:
    """A named credit: recovery, the CDS quotes it was calibrated to and its hazards."""
    name: str
    recovery: float
    hazard_curve: HazardCurve
    cds_quotes: Tuple[CdsQuote, ...] = field(default_factory=tuple)

    @classmethod
    def calibrate(cls, name: str, recovery: float, quotes: Sequence[CdsQuote], curve: ZeroCurve) -> "Counterparty":
        try:
            hc = bootstrap_hazards(quotes, recovery, curve)
        except CalibrationError as exc:
            raise CalibrationError(f"{name}: {exc}") from exc
        return cls(name=name, recovery=recovery, hazard_curve=hc, cds_quotes=tuple(quotes))

    @classmethod
    def risk_free(cls, name: str, anchor: date, recovery: float = 0.0) -> "Counterparty":
        return cls(name=name, recovery=recovery, hazard_curve=HazardCurve.zero(anchor, recovery))

    def shifted(self, curve: ZeroCurve, cds_bp: Union[float, Sequence[float]]) -> "Counterparty":
        """Counterparty with CDS spreads moved by ``cds_bp`` basis points.

        Quoted names are recalibrated on ``curve``; names without quotes get
        their hazards moved by the credit-triangle equivalent.
        """
        if self.cds_quotes:
            bumps = np.broadcast_to(np.asarray(cds_bp, dtype=float), (len(self.cds_quotes),))
            quotes = [CdsQuote(q.tenor, max(q.spread + b * 1e-4, 0.0)) for q, b in zip(self.cds_quotes, bumps)]
            return Counterparty.calibrate(self.name, self.recovery, quotes, curve)
        hc = self.hazard_curve
        if not hc.times:
            return self
        bumps = np.broadcast_to(np.asarray(cds_bp, dtype=float), (len(hc.hazards),))
        hazards = tuple(max(h + b * 1e-4 / (1.0 - hc.recovery), 0.0) for h, b in zip(hc.hazards, bumps))
        return replace(self, hazard_curve=replace(hc, hazards=hazards))

    def quote_errors(self, curve: ZeroCurve) -> List[Dict[str, float]]:
        rows = []
        for q in self.cds_quotes:
            model = par_cds_spread(self.hazard_curve, q.tenor, curve)
            rows.append({"tenor": q.tenor, "spread": q.spread, "model": model, "error": model - q.spread})
        return rows


def credit_triangle_hazard(spread: float, recovery: float) -> float:
    _check_recovery(recovery)
    return spread / (1.0 - recovery)


def find_counterparty(parties: Sequence[Counterparty], name: str) -> Counterparty:
    for p in parties:
        if p.name == name:
            return p
    known = ", ".join(p.name for p in parties)
    raise InputError(f"unknown counterparty {name!r} (known: {known})")

