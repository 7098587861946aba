"""Risk-free discount curve: instruments, log-linear ZeroCurve and bootstrap.

The curve is built from the usual short-end money-market strip:

- ``DEPOSIT``  simple ACT/360 rate from the anchor to the maturity date.
- ``FUTURE``   3M Eurodollar future; the quoted date is the IMM start and the
  implied forward ``(100 - price) / 100`` is used without convexity adjustment.
- ``PAR_SWAP`` spot-starting par swap, semiannual 30/360 fixed against
  quarterly ACT/360 floating.

Discount factors are interpolated log-linearly on an ACT/365F time axis, which
keeps them positive and multiplicative between pillars.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .dates import (
    WEEKENDS,
    Calendar,
    DayCount,
    Frequency,
    Roll,
    Schedule,
    add_months,
    generate_schedule,
    year_fraction,
)
from .errors import CalibrationError, InputError

logger = logging.getLogger(__name__)

TIME_BASIS = DayCount.ACT_365F


class InstrumentKind(Enum):
    DEPOSIT = "deposit"
    FUTURE = "future"
    PAR_SWAP = "swap"

    @classmethod
    def parse(cls, text: str) -> "InstrumentKind":
        key = text.strip().lower()
        if key in ("par_swap", "swaps"):
            key = "swap"
        if key in ("futures", "eurodollar"):
            key = "future"
        try:
            return cls(key)
        except ValueError:
            raise InputError(f"Unknown curve instrument kind {text!r}") from None


_KIND_ORDER = {InstrumentKind.DEPOSIT: 0, InstrumentKind.FUTURE: 1, InstrumentKind.PAR_SWAP: 2}


@dataclass(frozen=True)
class SwapConvention:
    fixed_frequency: Frequency = Frequency.SEMIANNUAL
    fixed_day_count: DayCount = DayCount.THIRTY_360
    float_frequency: Frequency = Frequency.QUARTERLY
    float_day_count: DayCount = DayCount.ACT_360
    roll: Roll = Roll.MOD_FOLLOW
    calendar: Calendar = WEEKENDS

    def schedules(self, effective: date, maturity: date) -> Tuple[Schedule, Schedule]:
        return _swap_schedules(self, effective, maturity)


USD_SWAP = SwapConvention()


@functools.lru_cache(maxsize=1024)
def _swap_schedules(convention: SwapConvention, effective: date, maturity: date) -> Tuple[Schedule, Schedule]:
    fixed = generate_schedule(effective, maturity, convention.fixed_frequency, convention.roll, convention.calendar)
    flt = generate_schedule(effective, maturity, convention.float_frequency, convention.roll, convention.calendar)
    return fixed, flt


@dataclass(frozen=True)
class CurveInstrument:
    kind: InstrumentKind
    label: str
    maturity: date
    quote: float

    def __post_init__(self):
        if self.kind is InstrumentKind.FUTURE:
            if not 0.0 < self.quote < 200.0:
                raise InputError(f"{self.label}: futures price must be in (0, 200), got {self.quote}")
        elif not -0.1 < self.quote < 1.0:
            raise InputError(f"{self.label}: rate quote must be in (-0.1, 1), got {self.quote}")

    def start_date(self, anchor: date) -> date:
        # futures carry their own IMM start, everything else is spot-starting
        return self.maturity if self.kind is InstrumentKind.FUTURE else anchor

    def end_date(self, anchor: date, convention: SwapConvention = USD_SWAP) -> date:
        if self.kind is InstrumentKind.FUTURE:
            return convention.calendar.adjust(add_months(self.maturity, 3), convention.roll)
        if self.kind is InstrumentKind.PAR_SWAP:
            return convention.calendar.adjust(self.maturity, convention.roll)
        return self.maturity

    def market_value(self) -> float:
        """Quote expressed as a rate (futures are converted to their forward)."""
        if self.kind is InstrumentKind.FUTURE:
            return (100.0 - self.quote) / 100.0
        return self.quote


def _log_df(times: np.ndarray, log_dfs: np.ndarray, t):
    t_arr = np.asarray(t, dtype=float)
    out = np.interp(t_arr, times, log_dfs)
    if len(times) > 1:
        slope = (log_dfs[-1] - log_dfs[-2]) / (times[-1] - times[-2])
        beyond = t_arr > times[-1]
        out = np.where(beyond, log_dfs[-1] + slope * (t_arr - times[-1]), out)
    return out


class ZeroCurve:
    """Discount curve anchored at ``anchor`` with (date, discount factor) pillars.

    A pillar at the anchor with discount factor 1 is added when missing.
    Beyond the last pillar the last segment's forward rate is continued.
    """

    def __init__(self, anchor: date, pillars: Iterable[Tuple[date, float]], *, _validate: bool = True):
        pts = sorted(dict(pillars).items())
        if not pts or pts[0][0] != anchor:
            pts.insert(0, (anchor, 1.0))
        self.anchor = anchor
        self.pillars: Tuple[Tuple[date, float], ...] = tuple((d, float(v)) for d, v in pts)
        self.times = np.array([year_fraction(anchor, d, TIME_BASIS) for d, _ in self.pillars])
        dfs = np.array([v for _, v in self.pillars])
        if _validate:
            self._check(dfs)
        self.log_dfs = np.log(dfs)

    def _check(self, dfs: np.ndarray) -> None:
        if self.pillars[0][0] < self.anchor:
            raise InputError(f"pillar {self.pillars[0][0]} precedes curve anchor {self.anchor}")
        if abs(dfs[0] - 1.0) > 1e-15:
            raise InputError(f"discount factor at anchor must be 1, got {dfs[0]}")
        if np.any(dfs <= 0.0):
            raise InputError("discount factors must be strictly positive")
        bad = np.nonzero(np.diff(dfs) > 1e-15)[0]
        if bad.size:
            d = self.pillars[bad[0] + 1][0]
            raise InputError(f"discount factors must be non-increasing, increase at pillar {d}")
        if np.any(np.diff(self.times) <= 0.0):
            raise InputError("pillar dates must be distinct")

    @classmethod
    def flat(cls, anchor: date, rate: float, horizon_years: int = 60) -> "ZeroCurve":
        """Flat continuously-compounded curve."""
        end = add_months(anchor, 12 * horizon_years)
        t = year_fraction(anchor, end, TIME_BASIS)
        return cls(anchor, [(anchor, 1.0), (end, math.exp(-rate * t))])

    def time(self, d: date) -> float:
        if d < self.anchor:
            raise ValueError(f"date {d} precedes curve anchor {self.anchor}")
        return year_fraction(self.anchor, d, TIME_BASIS)

    def df_time(self, t):
        return np.exp(_log_df(self.times, self.log_dfs, t))

    def df(self, d: date) -> float:
        return float(self.df_time(self.time(d)))

    def zero_rate(self, d: date) -> float:
        """Continuously compounded zero rate to ``d``."""
        t = self.time(d)
        if t == 0.0:
            return self.forward_rate_time(0.0, self.times[1]) if len(self.times) > 1 else 0.0
        return float(-_log_df(self.times, self.log_dfs, t) / t)

    def forward_rate_time(self, t1: float, t2: float) -> float:
        """Continuously compounded forward between two model times."""
        if t2 <= t1:
            raise ValueError(f"forward period must have t2 > t1, got {t1}, {t2}")
        l1, l2 = _log_df(self.times, self.log_dfs, [t1, t2])
        return float((l1 - l2) / (t2 - t1))

    def shifted(self, shift_bp: Union[float, Sequence[float]]) -> "ZeroCurve":
        """Curve with pillar zero rates moved by ``shift_bp`` basis points.

        A scalar is a parallel shift; a sequence gives one shift per pillar
        after the anchor.
        """
        n = len(self.pillars) - 1
        shifts = np.asarray(shift_bp, dtype=float)
        if shifts.ndim == 0:
            shifts = np.full(n, float(shifts))
        if shifts.shape != (n,):
            raise ValueError(f"expected {n} pillar shifts, got {shifts.shape[0]}")
        new_log = self.log_dfs[1:] - shifts * 1e-4 * self.times[1:]
        pillars = [(self.anchor, 1.0)] + [(d, float(math.exp(v))) for (d, _), v in zip(self.pillars[1:], new_log)]
        # a large negative shift may legitimately produce an increasing curve
        return ZeroCurve(self.anchor, pillars, _validate=False)

    def pillar_table(self) -> List[Dict[str, object]]:
        rows = []
        for (d, v), t in zip(self.pillars, self.times):
            rows.append({
                "date": d.isoformat(),
                "time": float(t),
                "discount_factor": v,
                "zero_rate": self.zero_rate(d),
            })
        return rows

    def __repr__(self) -> str:
        return f"ZeroCurve(anchor={self.anchor}, pillars={len(self.pillars)})"


def discount_factor(curve: ZeroCurve, t: date, T: date) -> float:
    """D(t, T) = D(anchor, T) / D(anchor, t)."""
    if T < t:
        raise ValueError(f"maturity {T} precedes valuation date {t}")
    if t == T:
        return 1.0
    return curve.df(T) / curve.df(t)


@functools.lru_cache(maxsize=1024)
def _leg_times(anchor: date, schedule: Schedule, dc: DayCount) -> Tuple[np.ndarray, ...]:
    if schedule.effective < anchor:
        raise ValueError(f"schedule starts {schedule.effective}, before curve anchor {anchor}")
    accrual = np.array([year_fraction(p.accrual_start, p.accrual_end, dc) for p in schedule.periods])
    t_start = np.array([year_fraction(anchor, p.accrual_start, TIME_BASIS) for p in schedule.periods])
    t_end = np.array([year_fraction(anchor, p.accrual_end, TIME_BASIS) for p in schedule.periods])
    t_pay = np.array([year_fraction(anchor, p.pay_date, TIME_BASIS) for p in schedule.periods])
    return accrual, t_start, t_end, t_pay


def fixed_annuity(curve: ZeroCurve, schedule: Schedule, dc: DayCount) -> float:
    accrual, _, _, t_pay = _leg_times(curve.anchor, schedule, dc)
    return float(np.sum(accrual * curve.df_time(t_pay)))


def float_leg_pv(curve: ZeroCurve, schedule: Schedule, dc: DayCount) -> float:
    # projected simple forward growth, discounted from the pay date
    _, t_start, t_end, t_pay = _leg_times(curve.anchor, schedule, dc)
    growth = curve.df_time(t_start) / curve.df_time(t_end) - 1.0
    return float(np.sum(curve.df_time(t_pay) * growth))


def par_swap_rate(
    curve: ZeroCurve,
    fixed_schedule: Schedule,
    float_schedule: Schedule,
    fixed_dc: DayCount = DayCount.THIRTY_360,
    float_dc: DayCount = DayCount.ACT_360,
) -> float:
    """Fixed rate equating the fixed and floating leg PVs per unit notional.

    ``float_dc`` is kept for the leg definition; with single-curve projection
    the floating PV does not depend on it.
    """
    if fixed_schedule.effective != float_schedule.effective or fixed_schedule.maturity != float_schedule.maturity:
        raise ValueError("fixed and floating schedules must share effective and maturity dates")
    annuity = fixed_annuity(curve, fixed_schedule, fixed_dc)
    if annuity == 0.0:
        raise ValueError("fixed leg annuity is zero")
    return float_leg_pv(curve, float_schedule, float_dc) / annuity


def market_par_rate(curve: ZeroCurve, effective: date, maturity: date,
                    convention: SwapConvention = USD_SWAP) -> float:
    fixed, flt = convention.schedules(effective, maturity)
    return par_swap_rate(curve, fixed, flt, convention.fixed_day_count, convention.float_day_count)


def model_value(curve: ZeroCurve, instrument: CurveInstrument,
                convention: SwapConvention = USD_SWAP) -> float:
    """Instrument's model rate on ``curve`` (futures as implied forward)."""
    anchor = curve.anchor
    if instrument.kind is InstrumentKind.DEPOSIT:
        tau = year_fraction(anchor, instrument.maturity, DayCount.ACT_360)
        return (1.0 / curve.df(instrument.maturity) - 1.0) / tau
    if instrument.kind is InstrumentKind.FUTURE:
        start = instrument.start_date(anchor)
        end = instrument.end_date(anchor, convention)
        tau = year_fraction(start, end, DayCount.ACT_360)
        return (curve.df(start) / curve.df(end) - 1.0) / tau
    return market_par_rate(curve, anchor, instrument.maturity, convention)


def model_quote(curve: ZeroCurve, instrument: CurveInstrument,
                convention: SwapConvention = USD_SWAP) -> float:
    """Model value in the instrument's own quoting convention."""
    v = model_value(curve, instrument, convention)
    return 100.0 - 100.0 * v if instrument.kind is InstrumentKind.FUTURE else v


def _select_instruments(anchor: date, instruments: Sequence[CurveInstrument],
                        convention: SwapConvention) -> List[Tuple[date, CurveInstrument]]:
    by_end: Dict[date, Tuple[Tuple[date, int, int], CurveInstrument]] = {}
    for idx, ins in enumerate(instruments):
        end = ins.end_date(anchor, convention)
        if end <= anchor:
            raise InputError(f"{ins.label}: end date {end} is not after the curve anchor {anchor}")
        if ins.start_date(anchor) < anchor:
            raise InputError(f"{ins.label}: start date {ins.start_date(anchor)} precedes the curve anchor")
        key = (ins.start_date(anchor), _KIND_ORDER[ins.kind], idx)
        if end in by_end:
            kept_key, kept = by_end[end]
            loser = kept if key > kept_key else ins
            logger.warning("dropping %s: shares end date %s with a later-starting instrument", loser.label, end)
            if key < kept_key:
                continue
        by_end[end] = (key, ins)

    chosen = sorted(by_end.items(), key=lambda kv: (_KIND_ORDER[kv[1][1].kind], kv[1][0][2]))
    ordered = [(end, ins) for end, (_, ins) in chosen]
    for (e0, a), (e1, b) in zip(ordered, ordered[1:]):
        if e1 <= e0:
            raise InputError(f"instrument maturities must increase: {b.label} ends {e1}, not after {a.label} ({e0})")
    return ordered


def bootstrap_curve(
    anchor: date,
    instruments: Sequence[CurveInstrument],
    convention: SwapConvention = USD_SWAP,
    xtol: float = 1e-15,
) -> ZeroCurve:
    """Sequentially bootstrap one pillar per instrument.

    Each pillar is found by a bracketed root-find on the continuously
    compounded forward of the new curve segment, so instruments whose start
    falls inside the unknown segment are handled without special casing.
    """
    if not instruments:
        raise InputError("cannot bootstrap a curve from an empty instrument list")
    ordered = _select_instruments(anchor, instruments, convention)
    pillars: List[Tuple[date, float]] = [(anchor, 1.0)]

    for end, ins in ordered:
        prev_date, prev_df = pillars[-1]
        dt = year_fraction(prev_date, end, TIME_BASIS)
        target = ins.market_value()

        def residual(z: float) -> float:
            trial = ZeroCurve(anchor, pillars + [(end, prev_df * math.exp(-z * dt))], _validate=False)
            return model_value(trial, ins, convention) - target

        lo, hi = -1.0, 5.0
        f_lo, f_hi = residual(lo), residual(hi)
        if f_lo * f_hi > 0.0:
            raise CalibrationError(f"bootstrap failed at pillar {ins.label} ({end}): root not bracketed")
        z = brentq(residual, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
        if z < -1e-12:
            raise CalibrationError(
                f"bootstrap failed at pillar {ins.label} ({end}): implied forward {z:.6g} gives increasing discount factors"
            )
        pillars.append((end, prev_df * math.exp(-max(z, 0.0) * dt)))
        logger.debug("pillar %s %s df=%.12f", ins.label, end, pillars[-1][1])

    return ZeroCurve(anchor, pillars)


def repricing_errors(curve: ZeroCurve, instruments: Sequence[CurveInstrument],
                     convention: SwapConvention = USD_SWAP) -> List[Dict[str, object]]:
    """Per-instrument model quote and error against the market quote."""
    rows = []
    for ins in instruments:
        mq = model_quote(curve, ins, convention)
        rows.append({"label": ins.label, "kind": ins.kind.value, "quote": ins.quote,
                     "model": mq, "error": mq - ins.quote})
    return rows


