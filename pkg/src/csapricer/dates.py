from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum
from typing import FrozenSet, List, Tuple

from dateutil.relativedelta import relativedelta


class DayCount(Enum):
    THIRTY_360 = "30/360"
    ACT_360 = "ACT/360"
    ACT_365F = "ACT/365F"

    @classmethod
    def parse(cls, text: str) -> "DayCount":
        key = text.strip().upper().replace("_", "/")
        aliases = {"30/360": cls.THIRTY_360, "ACT/360": cls.ACT_360,
                   "ACT/365": cls.ACT_365F, "ACT/365F": cls.ACT_365F}
        if key not in aliases:
            raise ValueError(f"Unknown day count {text!r}, expected one of {sorted(aliases)}")
        return aliases[key]


class Frequency(Enum):
    QUARTERLY = 3
    SEMIANNUAL = 6
    ANNUAL = 12

    @property
    def months(self) -> int:
        return self.value

    @property
    def per_year(self) -> int:
        return 12 // self.value

    @classmethod
    def parse(cls, text: str) -> "Frequency":
        key = text.strip().upper().replace("-", "").replace(" ", "")
        aliases = {"QUARTERLY": cls.QUARTERLY, "3M": cls.QUARTERLY,
                   "SEMIANNUAL": cls.SEMIANNUAL, "SEMIANNUALLY": cls.SEMIANNUAL, "6M": cls.SEMIANNUAL,
                   "ANNUAL": cls.ANNUAL, "ANNUALLY": cls.ANNUAL, "12M": cls.ANNUAL}
        if key not in aliases:
            raise ValueError(f"Unknown payment frequency {text!r}")
        return aliases[key]


class Roll(Enum):
    UNADJUSTED = "unadjusted"
    FOLLOWING = "following"
    MOD_FOLLOW = "mod_follow"
    PRECEDING = "preceding"

    @classmethod
    def parse(cls, text: str) -> "Roll":
        key = text.strip().lower().replace("-", "_").replace(" ", "_")
        if key in ("modified_following", "modfollow"):
            key = "mod_follow"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"Unknown roll convention {text!r}") from None


def _thirty_360(start: date, end: date) -> float:
    d1 = min(start.day, 30)
    d2 = end.day
    if d2 == 31 and d1 == 30:
        d2 = 30
    days = 360 * (end.year - start.year) + 30 * (end.month - start.month) + (d2 - d1)
    return days / 360.0


_YEAR_FRACTION = {
    DayCount.THIRTY_360: _thirty_360,
    DayCount.ACT_360: lambda s, e: (e - s).days / 360.0,
    DayCount.ACT_365F: lambda s, e: (e - s).days / 365.0,
}


def year_fraction(start: date, end: date, dc: DayCount = DayCount.ACT_365F) -> float:
    """Accrual fraction between two dates (30/360 uses the ISDA bond basis)."""
    if end < start:
        raise ValueError(f"end date {end} precedes start date {start}")
    return _YEAR_FRACTION[dc](start, end)


@dataclass(frozen=True)
class Calendar:
    """Weekend calendar with an optional set of extra holidays."""
    holidays: FrozenSet[date] = frozenset()
    name: str = "WEEKENDS"

    def is_business_day(self, d: date) -> bool:
        return d.weekday() < 5 and d not in self.holidays

    def adjust(self, d: date, roll: Roll = Roll.MOD_FOLLOW) -> date:
        if roll is Roll.UNADJUSTED or self.is_business_day(d):
            return d
        if roll is Roll.PRECEDING:
            return self._step(d, -1)
        rolled = self._step(d, 1)
        if roll is Roll.MOD_FOLLOW and rolled.month != d.month:
            return self._step(d, -1)
        return rolled

    def _step(self, d: date, direction: int) -> date:
        while not self.is_business_day(d):
            d += timedelta(days=direction)
        return d


WEEKENDS = Calendar()


@dataclass(frozen=True)
class Period:
    accrual_start: date
    accrual_end: date
    pay_date: date


@dataclass(frozen=True)
class Schedule:
    effective: date
    maturity: date
    frequency: Frequency
    roll: Roll
    periods: Tuple[Period, ...] = field(default_factory=tuple)

    @property
    def pay_dates(self) -> List[date]:
        return [p.pay_date for p in self.periods]

    def __len__(self) -> int:
        return len(self.periods)


def add_months(d: date, months: int) -> date:
    return d + relativedelta(months=months)


def generate_schedule(
    effective: date,
    maturity: date,
    freq: Frequency,
    roll: Roll = Roll.MOD_FOLLOW,
    calendar: Calendar = WEEKENDS,
) -> Schedule:
    """Roll backward from maturity in whole periods; a leftover front piece
    becomes a short stub. Boundaries are business-day adjusted and
    coincident adjusted boundaries are merged."""
    if effective >= maturity:
        raise ValueError(f"effective date {effective} must precede maturity {maturity}")
    unadjusted = [maturity]
    k = 1
    while True:
        d = add_months(maturity, -freq.months * k)
        if d <= effective:
            break
        unadjusted.append(d)
        k += 1
    unadjusted.append(effective)
    unadjusted.reverse()

    bounds: List[date] = []
    for d in unadjusted:
        adj = calendar.adjust(d, roll)
        if not bounds or adj > bounds[-1]:
            bounds.append(adj)
    periods = tuple(
        Period(accrual_start=s, accrual_end=e, pay_date=e)
        for s, e in zip(bounds[:-1], bounds[1:])
    )
    return Schedule(effective=effective, maturity=maturity, frequency=freq, roll=roll, periods=periods)
