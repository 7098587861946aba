"""Trade terms and their projection onto lattice nodes.

All amounts are signed from the bank's point of view. Floating coupons and
caplets are fixed at the start of their accrual period and paid at its end;
on the lattice they are carried as their risk-free value on the fixing slice.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from typing import List, Optional

import numpy as np

from .curve import SwapConvention
from .dates import (
    WEEKENDS,
    Calendar,
    DayCount,
    Frequency,
    Roll,
    Schedule,
    year_fraction,
)
from .errors import InputError, PricingError
from .lattice import RateLattice


class TradeKind(Enum):
    PAYER_SWAP = "payer_swap"
    RECEIVER_SWAP = "receiver_swap"
    CAP = "cap"
    FLOOR = "floor"
    EUROPEAN_SWAPTION = "european_swaption"

    @classmethod
    def parse(cls, text: str) -> "TradeKind":
        key = text.strip().lower().replace("-", "_").replace(" ", "_")
        if key == "swaption":
            key = "european_swaption"
        try:
            return cls(key)
        except ValueError:
            raise InputError(f"Unknown trade kind {text!r}") from None

    @property
    def is_swap(self) -> bool:
        return self in (TradeKind.PAYER_SWAP, TradeKind.RECEIVER_SWAP)


@dataclass(frozen=True)
class Trade:
    """One trade with a single counterparty.

    ``rate`` is the fixed rate of a swap or the strike of a cap, floor or
    swaption. For swaptions ``effective``/``maturity`` describe the underlying
    swap, which the holder enters at ``expiry`` (cash settled).
    """
    kind: TradeKind
    notional: float
    effective: date
    maturity: date
    rate: float
    fixed_frequency: Frequency = Frequency.SEMIANNUAL
    float_frequency: Frequency = Frequency.QUARTERLY
    fixed_day_count: DayCount = DayCount.THIRTY_360
    float_day_count: DayCount = DayCount.ACT_360
    roll: Roll = Roll.MOD_FOLLOW
    calendar: Calendar = WEEKENDS
    long: bool = True
    expiry: Optional[date] = None
    underlying: TradeKind = TradeKind.PAYER_SWAP
    label: str = ""
    counterparty: Optional[str] = None

    def __post_init__(self):
        if not self.notional > 0:
            raise InputError(f"{self.label or self.kind.value}: notional must be positive, got {self.notional}")
        if self.effective >= self.maturity:
            raise InputError(f"{self.label or self.kind.value}: effective {self.effective} must precede maturity {self.maturity}")
        if self.kind is TradeKind.EUROPEAN_SWAPTION:
            if self.expiry is None:
                raise InputError(f"{self.label or 'swaption'}: expiry is required")
            if self.expiry > self.effective:
                raise InputError(f"{self.label or 'swaption'}: expiry {self.expiry} is after underlying start {self.effective}")
            if not self.underlying.is_swap:
                raise InputError(f"{self.label or 'swaption'}: underlying must be a swap, got {self.underlying.value}")

    @property
    def convention(self) -> SwapConvention:
        return SwapConvention(self.fixed_frequency, self.fixed_day_count, self.float_frequency,
                              self.float_day_count, self.roll, self.calendar)

    def with_rate(self, rate: float) -> "Trade":
        return replace(self, rate=rate)

    def underlying_swap(self) -> "Trade":
        if self.kind is not TradeKind.EUROPEAN_SWAPTION:
            raise ValueError(f"{self.label}: only swaptions have an underlying swap")
        return replace(self, kind=self.underlying, expiry=None, long=True, label=f"{self.label} underlying")

    def fixed_schedule(self) -> Schedule:
        return self.convention.schedules(self.effective, self.maturity)[0]

    def float_schedule(self) -> Schedule:
        return self.convention.schedules(self.effective, self.maturity)[1]

    def event_dates(self) -> List[date]:
        """Dates on which this trade fixes, settles or expires."""
        if self.kind is TradeKind.EUROPEAN_SWAPTION:
            return [self.expiry]
        out = set()
        if self.kind.is_swap:
            out.update(self.fixed_schedule().pay_dates)
        for p in self.float_schedule().periods:
            out.add(p.accrual_start)
            out.add(p.pay_date)
        return sorted(out)

    def lattice_dates(self) -> List[date]:
        """Every date the lattice needs to value this trade."""
        if self.kind is TradeKind.EUROPEAN_SWAPTION:
            return sorted({self.expiry, *self.underlying_swap().event_dates()})
        return self.event_dates()


class FlowKind(Enum):
    FIXED = "fixed"
    FLOATING = "floating"
    CAPLET = "caplet"
    FLOORLET = "floorlet"
    SWAPTION = "swaption"


@dataclass(frozen=True)
class Cashflow:
    """A cash flow paid on ``pay_date`` and known from ``fix_date`` on.

    ``amount`` is the signed fixed amount for FIXED flows; other kinds are
    node functions of the fixing-slice bond price ``P(fix, pay)``.
    """
    kind: FlowKind
    pay_date: date
    fix_date: date
    sign: float
    notional: float
    accrual: float = 0.0
    strike: float = 0.0
    amount: float = 0.0


@dataclass
class NodeFlow:
    """Lattice values on ``slice`` of a flow paid on ``pay_slice``.

    For flows settled on the slice itself ``slice == pay_slice`` and ``values``
    are the amounts paid; for flows fixed in advance ``values`` are their
    risk-free value on the fixing slice.
    """
    slice: int
    pay_slice: int
    values: np.ndarray
    label: str = ""


def expand_cashflows(trade: Trade, anchor: date) -> List[Cashflow]:
    """Cash flows of a swap, cap or floor that are paid after ``anchor``."""
    if trade.kind is TradeKind.EUROPEAN_SWAPTION:
        if trade.expiry <= anchor:
            return []
        return [Cashflow(FlowKind.SWAPTION, trade.expiry, trade.expiry,
                         1.0 if trade.long else -1.0, trade.notional, strike=trade.rate)]
    if trade.effective < anchor:
        raise PricingError(
            f"{trade.label or trade.kind.value}: effective {trade.effective} precedes the valuation date {anchor}; "
            "seasoned floating periods are not supported"
        )
    flows: List[Cashflow] = []
    n = trade.notional
    if trade.kind.is_swap:
        fixed_sign = 1.0 if trade.kind is TradeKind.RECEIVER_SWAP else -1.0
        for p in trade.fixed_schedule().periods:
            tau = year_fraction(p.accrual_start, p.accrual_end, trade.fixed_day_count)
            flows.append(Cashflow(FlowKind.FIXED, p.pay_date, p.pay_date, fixed_sign, n,
                                  accrual=tau, strike=trade.rate, amount=fixed_sign * n * trade.rate * tau))
        for p in trade.float_schedule().periods:
            tau = year_fraction(p.accrual_start, p.accrual_end, trade.float_day_count)
            flows.append(Cashflow(FlowKind.FLOATING, p.pay_date, p.accrual_start, -fixed_sign, n, accrual=tau))
    else:
        kind = FlowKind.CAPLET if trade.kind is TradeKind.CAP else FlowKind.FLOORLET
        sign = 1.0 if trade.long else -1.0
        for p in trade.float_schedule().periods:
            tau = year_fraction(p.accrual_start, p.accrual_end, trade.float_day_count)
            flows.append(Cashflow(kind, p.pay_date, p.accrual_start, sign, n, accrual=tau, strike=trade.rate))
    return [f for f in flows if f.pay_date > anchor]


def _flow_values(flow: Cashflow, lattice: RateLattice, fix: int, pay: int) -> np.ndarray:
    if flow.kind is FlowKind.FIXED:
        return np.full(lattice.n_nodes(pay), flow.amount)
    bond = lattice.zero_bond(fix, pay)
    if flow.kind is FlowKind.FLOATING:
        # N (1/P - 1) paid at the end is worth N (1 - P) at the fixing
        return flow.sign * flow.notional * (1.0 - bond)
    libor = (1.0 / bond - 1.0) / flow.accrual
    if flow.kind is FlowKind.CAPLET:
        payoff = np.maximum(libor - flow.strike, 0.0)
    else:
        payoff = np.maximum(flow.strike - libor, 0.0)
    return flow.sign * flow.notional * flow.accrual * payoff * bond


def swap_value_on_slice(trade: Trade, lattice: RateLattice, start: int) -> np.ndarray:
    """Risk-free node values on slice ``start`` of a swap's flows after it."""
    total = np.zeros(lattice.n_nodes(start))
    for nf in _trade_node_flows(trade, lattice):
        if nf.slice < start:
            raise PricingError(f"{trade.label}: flow fixes before the exercise slice")
        total += lattice.rollback(nf.values, start, nf.slice)
    return total


def _trade_node_flows(trade: Trade, lattice: RateLattice) -> List[NodeFlow]:
    out: List[NodeFlow] = []
    for flow in expand_cashflows(trade, lattice.anchor):
        pay = lattice.slice_index(flow.pay_date)
        if flow.kind is FlowKind.SWAPTION:
            underlying = swap_value_on_slice(trade.underlying_swap(), lattice, pay)
            out.append(NodeFlow(pay, pay, flow.sign * np.maximum(underlying, 0.0), trade.label))
            continue
        if flow.kind is FlowKind.FIXED:
            out.append(NodeFlow(pay, pay, _flow_values(flow, lattice, pay, pay), trade.label))
            continue
        fix = lattice.slice_index(flow.fix_date)
        out.append(NodeFlow(fix, pay, _flow_values(flow, lattice, fix, pay), trade.label))
    return out


def node_cashflows(trade: Trade, lattice: RateLattice) -> List[NodeFlow]:
    """Project every remaining cash flow of ``trade`` onto lattice nodes."""
    return _trade_node_flows(trade, lattice)
