"""Collateral-adjusted valuation.

A netting set is valued by backward induction over its event dates. Between
two consecutive events ``T_j < T_{j+1}`` the risk-free continuation ``f`` is the
discounted expectation of the next value plus the flows paid at ``T_{j+1}``.
With ``I = p + phi q`` the risk-adjusted ratio of the period and ``H`` the
effective threshold, each node takes

    f <= 0          V = f                          (bank owes, no credit effect)
    J = I f <= H    V = J                          (uncollateralized)
    J > H           V = (J - H q (1 - phi)) / I    (collateral posted)

``H = 0`` reproduces the risk-free value and ``H = inf`` the risky value with
no CSA. Hazards are deterministic so ``I`` and ``q`` are known per period.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from datetime import date
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .credit import Counterparty, HazardCurve
from .csa import CsaTerms, collateral_amount, effective_threshold
from .curve import ZeroCurve, market_par_rate
from .errors import CalibrationError, PricingError
from .lattice import LatticeConfig, RateLattice, build_lattice
from .trades import NodeFlow, Trade, node_cashflows

logger = logging.getLogger(__name__)


class ValuationMode(Enum):
    RISK_FREE = "riskfree"
    RISKY = "risky"
    COLLATERALIZED = "csa"

    @classmethod
    def parse(cls, text: str) -> "ValuationMode":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {"riskfree": cls.RISK_FREE, "free": cls.RISK_FREE, "risky": cls.RISKY,
                   "csa": cls.COLLATERALIZED, "collateralized": cls.COLLATERALIZED}
        if key not in aliases:
            raise ValueError(f"Unknown valuation mode {text!r}, expected riskfree, risky or csa")
        return aliases[key]


def risk_adjusted_ratio(p: float, q: float, recovery: float) -> float:
    """I = p + phi q."""
    if abs(p + q - 1.0) > 1e-12:
        raise ValueError(f"survival and default probabilities must sum to 1, got p={p}, q={q}")
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError(f"probabilities must lie in [0, 1], got p={p}, q={q}")
    if not 0.0 <= recovery <= 1.0:
        raise ValueError(f"recovery must be in [0, 1], got {recovery}")
    return p + recovery * q


def _collateralize(J: np.ndarray, ratio: float, q: float, recovery: float, H: float):
    """Node values, CSA factor, unsecured-cost term and posting mask from ``J``."""
    if ratio <= 0.0:
        raise PricingError("risk-adjusted ratio is zero: certain default with zero recovery")
    J = np.asarray(J, dtype=float)
    owed = J <= 0.0
    if math.isinf(H) and H > 0:
        posted = np.zeros_like(J, dtype=bool)
    else:
        posted = ~owed & (J > H)
    G = np.where(posted, (H * q * (1.0 - recovery) / ratio) if not math.isinf(H) else 0.0, 0.0)
    F = np.where(owed | posted, 1.0, ratio)
    V = np.where(owed | posted, J / ratio - G, J)
    return V, F, G, owed, posted


@dataclass
class SinglePeriodResult:
    v_free: float
    v_risky: float
    v_csa: float
    csa_factor: float
    unsecured_cost: float


def value_single_period(
    payoff,
    discount,
    survival: float,
    recovery: float,
    threshold: float,
    weights=None,
) -> SinglePeriodResult:
    """Value of one collateralized payment under a CSA with threshold ``threshold``.

    ``payoff`` is the distribution of the payment across states, ``discount``
    the matching discount factors and ``weights`` the state probabilities
    (uniform when omitted).
    """
    x = np.atleast_1d(np.asarray(payoff, dtype=float))
    d = np.broadcast_to(np.asarray(discount, dtype=float), x.shape)
    w = np.full(x.shape, 1.0 / x.size) if weights is None else np.asarray(weights, dtype=float)
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"state weights must sum to 1, got {w.sum()}")
    q = 1.0 - survival
    ratio = risk_adjusted_ratio(survival, q, recovery)
    f = float(np.sum(w * d * x))
    J = np.array([ratio * f])
    v_risky = _collateralize(J, ratio, q, recovery, math.inf)[0]
    V, F, G, _, _ = _collateralize(J, ratio, q, recovery, threshold)
    return SinglePeriodResult(f, float(v_risky[0]), float(V[0]), float(F[0]), float(G[0]))


def continuation_value(
    lattice: RateLattice,
    start: int,
    end: int,
    next_values,
    ratio: float,
    advance=0.0,
) -> np.ndarray:
    """J on every node of slice ``start``.

    Sum over branches of prob * D * I * (V_next + X_next), rolled back step by
    step from slice ``end``. ``advance`` holds flows paid on ``end`` that are
    already valued on ``start`` (floating coupons fixed at ``start``).
    """
    return ratio * (lattice.rollback(next_values, start, end) + advance)


@dataclass
class PeriodDiagnostics:
    """State-price weighted averages on one event slice."""
    date: Optional[str]
    time: float
    survival: float
    risk_adjusted_ratio: float
    expected_value: float
    expected_continuation: float
    csa_factor: float
    unsecured_cost: float
    expected_collateral: float
    collateralized_share: float


@dataclass
class InductionResult:
    value: float
    node_values: Dict[int, np.ndarray]
    periods: List[PeriodDiagnostics]


def backward_induction(
    lattice: RateLattice,
    event_slices: Sequence[int],
    settled: Dict[int, np.ndarray],
    advance: Dict[int, np.ndarray],
    survivals: Sequence[float],
    recovery: float,
    threshold: float,
    slice_dates: Optional[Dict[int, date]] = None,
) -> InductionResult:
    """Roll the collateral recursion back from the last event to the first.

    ``settled[k]`` are amounts paid on event slice ``k``; ``advance[k]`` are
    risk-free values on slice ``k`` of flows paid on the next event slice.
    ``survivals[j]`` is the survival probability between events ``j`` and
    ``j + 1``. The value at the first event excludes flows settled on it.
    """
    events = list(event_slices)
    if len(survivals) != len(events) - 1:
        raise ValueError(f"need {len(events) - 1} period survivals, got {len(survivals)}")
    if any(b <= a for a, b in zip(events, events[1:])):
        raise ValueError(f"event slices must be increasing, got {events}")
    last = events[-1]
    V = np.zeros(lattice.n_nodes(last))
    node_values = {last: V}
    periods: List[PeriodDiagnostics] = []
    for j in range(len(events) - 2, -1, -1):
        cur, nxt = events[j], events[j + 1]
        p = float(survivals[j])
        q = 1.0 - p
        ratio = risk_adjusted_ratio(p, q, recovery)
        J = continuation_value(lattice, cur, nxt, V + settled.get(nxt, 0.0), ratio, advance.get(cur, 0.0))
        V, F, G, owed, posted = _collateralize(J, ratio, q, recovery, threshold)
        node_values[cur] = V
        Q = lattice.state_prices[cur]
        mass = Q.sum()
        # the bank holds no collateral on nodes where it owes the counterparty
        coll = np.where(owed, 0.0, collateral_amount(V, threshold))
        periods.append(PeriodDiagnostics(
            date=slice_dates[cur].isoformat() if slice_dates and cur in slice_dates else None,
            time=float(lattice.times[cur]),
            survival=p,
            risk_adjusted_ratio=ratio,
            expected_value=float(Q @ V / mass),
            expected_continuation=float(Q @ J / mass),
            csa_factor=float(Q @ F / mass),
            unsecured_cost=float(Q @ G / mass),
            expected_collateral=float(Q @ coll / mass),
            collateralized_share=float(Q @ posted.astype(float) / mass),
        ))
    periods.reverse()
    value = float(lattice.rollback(V, 0, events[0])[0])
    return InductionResult(value=value, node_values=node_values, periods=periods)


@dataclass
class NettingSet:
    counterparty: Counterparty
    csa: Optional[CsaTerms]
    trades: List[Trade] = field(default_factory=list)

    @property
    def threshold(self) -> float:
        return effective_threshold(self.csa)

    @property
    def notional(self) -> float:
        return float(sum(t.notional for t in self.trades))

    def with_threshold(self, h: float) -> "NettingSet":
        return NettingSet(self.counterparty, CsaTerms.with_threshold(h, self.counterparty.name), list(self.trades))

    def with_counterparty(self, counterparty: Counterparty) -> "NettingSet":
        return NettingSet(counterparty, self.csa, list(self.trades))


def lattice_dates(nset: NettingSet) -> List[date]:
    out = set()
    for t in nset.trades:
        out.update(t.lattice_dates())
    return sorted(out)


def build_set_lattice(nset: NettingSet, curve: ZeroCurve, cfg: LatticeConfig) -> RateLattice:
    dates = [d for d in lattice_dates(nset) if d >= curve.anchor]
    horizon = max(dates) if dates else curve.anchor
    return build_lattice(curve, cfg, horizon, dates)


@dataclass
class SetFlows:
    events: List[int]
    settled: Dict[int, np.ndarray]
    advance: Dict[int, np.ndarray]


def collect_flows(nset: NettingSet, lattice: RateLattice) -> SetFlows:
    """Aggregate node flows of every trade and check they fit the event grid."""
    flows: List[NodeFlow] = []
    for t in nset.trades:
        flows.extend(node_cashflows(t, lattice))
    events = sorted({0} | {f.slice for f in flows} | {f.pay_slice for f in flows})
    nxt = {a: b for a, b in zip(events, events[1:])}
    settled: Dict[int, np.ndarray] = {}
    advance: Dict[int, np.ndarray] = {}
    for f in flows:
        if f.slice == f.pay_slice:
            settled[f.slice] = settled.get(f.slice, 0.0) + f.values
        elif nxt.get(f.slice) != f.pay_slice:
            raise PricingError(
                f"{f.label}: a floating period from slice {f.slice} to {f.pay_slice} spans another event date; "
                "floating accruals must run between consecutive event dates"
            )
        else:
            advance[f.slice] = advance.get(f.slice, 0.0) + f.values
    return SetFlows(events, settled, advance)


def period_survivals(hc: HazardCurve, lattice: RateLattice, events: Sequence[int]) -> List[float]:
    if hc.anchor != lattice.anchor:
        raise PricingError(f"hazard curve anchor {hc.anchor} differs from lattice anchor {lattice.anchor}")
    t = lattice.times[list(events)]
    return [float(s) for s in hc.survival_time(t[:-1], t[1:])]


def netting_set_value(
    nset: NettingSet,
    lattice: RateLattice,
    mode: ValuationMode = ValuationMode.COLLATERALIZED,
    flows: Optional[SetFlows] = None,
) -> InductionResult:
    """Value the set under one of the three modes."""
    flows = flows if flows is not None else collect_flows(nset, lattice)
    hc = nset.counterparty.hazard_curve
    if mode is ValuationMode.RISK_FREE:
        survivals = [1.0] * (len(flows.events) - 1)
    else:
        survivals = period_survivals(hc, lattice, flows.events)
    H = nset.threshold if mode is ValuationMode.COLLATERALIZED else math.inf
    dates = {i: d for d, i in lattice.slice_of.items()}
    return backward_induction(lattice, flows.events, flows.settled, flows.advance, survivals,
                              hc.recovery, H, slice_dates=dates)


@dataclass
class ValuationReport:
    counterparty: str
    threshold: float
    notional: float
    v_free: float
    v_risky: float
    v_csa: float
    periods: List[PeriodDiagnostics] = field(default_factory=list)

    @property
    def cva_uncollateralized(self) -> float:
        return self.v_free - self.v_risky

    @property
    def cva_collateralized(self) -> float:
        return self.v_free - self.v_csa

    def to_dict(self) -> dict:
        out = asdict(self)
        out["threshold"] = None if math.isinf(self.threshold) else self.threshold
        out["cva_uncollateralized"] = self.cva_uncollateralized
        out["cva_collateralized"] = self.cva_collateralized
        return out


def price_collateralized(nset: NettingSet, lattice: RateLattice, curve: Optional[ZeroCurve] = None) -> ValuationReport:
    """Risk-free, risky and collateralized value of a netting set."""
    if curve is not None and curve.anchor != lattice.anchor:
        raise PricingError(f"curve anchor {curve.anchor} differs from lattice anchor {lattice.anchor}")
    if not nset.trades:
        return ValuationReport(nset.counterparty.name, nset.threshold, 0.0, 0.0, 0.0, 0.0)
    flows = collect_flows(nset, lattice)
    free = netting_set_value(nset, lattice, ValuationMode.RISK_FREE, flows)
    risky = netting_set_value(nset, lattice, ValuationMode.RISKY, flows)
    coll = netting_set_value(nset, lattice, ValuationMode.COLLATERALIZED, flows)
    logger.debug("%s: V^F=%.2f V^N=%.2f V^C=%.2f", nset.counterparty.name, free.value, risky.value, coll.value)
    return ValuationReport(
        counterparty=nset.counterparty.name,
        threshold=nset.threshold,
        notional=nset.notional,
        v_free=free.value,
        v_risky=risky.value,
        v_csa=coll.value,
        periods=coll.periods,
    )


def solve_collateralized_par_rate(
    template: Trade,
    counterparty: Counterparty,
    csa: Optional[CsaTerms],
    lattice: RateLattice,
    curve: ZeroCurve,
    other_trades: Sequence[Trade] = (),
    bracket: float = 0.05,
) -> float:
    """Fixed rate that sets the collateralized value of ``template`` to zero.

    The rest of the netting set (``other_trades``) is held fixed. The search
    brackets the risk-free par rate and is widened once before giving up.
    """
    if not template.kind.is_swap:
        raise ValueError(f"{template.label}: par rate needs a swap, got {template.kind.value}")
    generic = market_par_rate(curve, template.effective, template.maturity, template.convention)

    def pv(rate: float) -> float:
        nset = NettingSet(counterparty, csa, [template.with_rate(rate), *other_trades])
        return netting_set_value(nset, lattice, ValuationMode.COLLATERALIZED).value

    lo, hi = generic - bracket, generic + bracket
    f_lo, f_hi = pv(lo), pv(hi)
    if f_lo * f_hi > 0:
        logger.warning("%s: par-rate bracket [%g, %g] has no sign change, widening", template.label, lo, hi)
        lo, hi = generic - 5 * bracket, generic + 5 * bracket
        f_lo, f_hi = pv(lo), pv(hi)
        if f_lo * f_hi > 0:
            raise CalibrationError(f"{template.label}: no collateralized par rate in [{lo:.6f}, {hi:.6f}]")
    rate = brentq(pv, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    residual = pv(rate)
    if abs(residual) >= template.notional * 1e-10:
        raise CalibrationError(f"{template.label}: par-rate residual {residual:.3g} above tolerance")
    return float(rate)


def build_netting_sets(
    trades: Sequence[Trade],
    parties: Dict[str, Counterparty],
    csas: Dict[str, CsaTerms],
) -> List[NettingSet]:
    """Group trades by counterparty into netting sets, keeping input order."""
    groups: Dict[str, List[Trade]] = {}
    for t in trades:
        if t.counterparty is None:
            raise PricingError(f"{t.label or t.kind.value}: trade has no counterparty")
        if t.counterparty not in parties:
            raise PricingError(f"{t.label}: unknown counterparty {t.counterparty!r}")
        groups.setdefault(t.counterparty, []).append(t)
    return [NettingSet(parties[name], csas.get(name), ts) for name, ts in groups.items()]

