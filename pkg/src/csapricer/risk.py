"""CVA, collateral threshold sweeps and historical VaR.

VaR revalues a netting set under overlapping windows of historical market
moves: zero-rate shifts rebuild the curve and lattice, CDS shifts recalibrate
the counterparty on the shifted curve. The three valuation modes (risk-free,
risky without CSA, collateralized) share each revalued scenario.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import thread_limit
from .credit import Counterparty
from .csa import CsaTerms
from .curve import ZeroCurve, market_par_rate
from .dates import WEEKENDS, Frequency, Roll, add_months
from .lattice import LatticeConfig, RateLattice
from .pricing import (
    NettingSet,
    ValuationMode,
    build_set_lattice,
    collect_flows,
    netting_set_value,
    price_collateralized,
)
from .trades import Trade, TradeKind

logger = logging.getLogger(__name__)

Shift = Union[float, Tuple[float, ...]]


@dataclass
class SweepPoint:
    threshold: float
    v_csa: float
    cva: float


@dataclass
class CvaReport:
    counterparty: str
    threshold: float
    v_free: float
    v_risky: float
    v_csa: float
    sweep: List[SweepPoint] = field(default_factory=list)

    @property
    def cva_uncollateralized(self) -> float:
        return self.v_free - self.v_risky

    @property
    def cva_collateralized(self) -> float:
        return self.v_free - self.v_csa


def cva(nset: NettingSet, lattice: RateLattice, curve: Optional[ZeroCurve] = None) -> CvaReport:
    """CVA without collateral (V^F - V^N) and under the set's CSA (V^F - V^C)."""
    report = price_collateralized(nset, lattice, curve)
    return CvaReport(nset.counterparty.name, nset.threshold, report.v_free, report.v_risky, report.v_csa)


def threshold_sweep(
    nset: NettingSet,
    lattice: RateLattice,
    thresholds: Sequence[float],
    max_workers: Optional[int] = None,
) -> CvaReport:
    """Collateralized CVA for each effective threshold, ascending."""
    hs = [float(h) for h in thresholds]
    if any(b < a for a, b in zip(hs, hs[1:])):
        raise ValueError(f"thresholds must be sorted ascending, got {hs}")
    if not nset.trades:
        return CvaReport(nset.counterparty.name, nset.threshold, 0.0, 0.0, 0.0,
                         [SweepPoint(h, 0.0, 0.0) for h in hs])
    flows = collect_flows(nset, lattice)
    v_free = netting_set_value(nset, lattice, ValuationMode.RISK_FREE, flows).value
    v_risky = netting_set_value(nset, lattice, ValuationMode.RISKY, flows).value

    def one(h: float) -> float:
        return netting_set_value(nset.with_threshold(h), lattice, ValuationMode.COLLATERALIZED, flows).value

    with ThreadPoolExecutor(max_workers=thread_limit(max_workers)) as pool:
        values = list(pool.map(one, hs))
    base = netting_set_value(nset, lattice, ValuationMode.COLLATERALIZED, flows).value
    points = [SweepPoint(h, v, v_free - v) for h, v in zip(hs, values)]
    return CvaReport(nset.counterparty.name, nset.threshold, v_free, v_risky, base, points)


@dataclass
class VarResult:
    confidence: float
    scenarios: int
    k: int
    var: float
    magnitude: float


def historical_var(pnl: Sequence[float], confidence: float = 0.99) -> VarResult:
    """Left-tail order statistic: the k-th smallest P&L, k = ceil((1 - c) N).

    ``var`` keeps the sign of the P&L; ``magnitude`` is the loss reported as
    a positive number (zero when that P&L is a gain).
    """
    values = np.sort(np.asarray(pnl, dtype=float))
    if values.size == 0:
        raise ValueError("historical VaR needs at least one P&L scenario")
    if not 0.5 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0.5, 1), got {confidence}")
    k = max(1, math.ceil(round((1.0 - confidence) * values.size, 9)))
    signed = float(values[k - 1])
    return VarResult(confidence, int(values.size), k, signed, max(-signed, 0.0))


@dataclass(frozen=True)
class MarketShift:
    """One day of market moves in basis points.

    ``curve_bp`` and ``cds_bp`` are either a parallel shift or one shift per
    curve pillar / CDS tenor.
    """
    date: date
    curve_bp: Shift = 0.0
    cds_bp: Shift = 0.0


@dataclass
class PnlScenario:
    start: date
    end: date
    curve_bp: Shift
    cds_bp: Shift
    pnl: float


def _as_shift(v) -> Shift:
    arr = np.asarray(v, dtype=float)
    return float(arr) if arr.ndim == 0 else tuple(float(x) for x in arr)


def horizon_windows(history: Sequence[MarketShift], horizon: int) -> List[Tuple[date, date, Shift, Shift]]:
    """Overlapping ``horizon``-day sums of daily shifts."""
    if horizon < 1:
        raise ValueError(f"horizon must be at least one day, got {horizon}")
    if len(history) < horizon:
        raise ValueError(f"need at least {horizon} days of history for one window, got {len(history)}")
    out = []
    for k in range(len(history) - horizon + 1):
        window = history[k:k + horizon]
        curve = sum(np.asarray(s.curve_bp, dtype=float) for s in window)
        cds = sum(np.asarray(s.cds_bp, dtype=float) for s in window)
        out.append((window[0].date, window[-1].date, _as_shift(curve), _as_shift(cds)))
    return out


def _revalue(
    nset: NettingSet,
    curve: ZeroCurve,
    cfg: LatticeConfig,
    curve_bp: Shift,
    cds_bp: Shift,
    modes: Sequence[Tuple[ValuationMode, float]],
) -> List[float]:
    shifted_curve = curve.shifted(curve_bp) if np.any(np.asarray(curve_bp) != 0.0) else curve
    party = nset.counterparty
    if shifted_curve is not curve or np.any(np.asarray(cds_bp) != 0.0):
        party = party.shifted(shifted_curve, cds_bp)
    moved = nset.with_counterparty(party)
    lattice = build_set_lattice(moved, shifted_curve, cfg)
    flows = collect_flows(moved, lattice)
    out = []
    for mode, h in modes:
        target = moved.with_threshold(h) if mode is ValuationMode.COLLATERALIZED else moved
        out.append(netting_set_value(target, lattice, mode, flows).value)
    return out


def _scenario_matrix(
    nset: NettingSet,
    curve: ZeroCurve,
    cfg: LatticeConfig,
    history: Sequence[MarketShift],
    modes: Sequence[Tuple[ValuationMode, float]],
    horizon: int,
    max_workers: Optional[int],
):
    windows = horizon_windows(history, horizon)
    base = _revalue(nset, curve, cfg, 0.0, 0.0, modes)

    def one(w):
        return _revalue(nset, curve, cfg, w[2], w[3], modes)

    with ThreadPoolExecutor(max_workers=thread_limit(max_workers)) as pool:
        values = list(pool.map(one, windows))
    logger.info("revalued %d scenarios in %d modes", len(windows), len(modes))
    pnl = np.array(values) - np.array(base)
    return windows, pnl


def pnl_scenarios(
    nset: NettingSet,
    curve: ZeroCurve,
    cfg: LatticeConfig,
    history: Sequence[MarketShift],
    mode: ValuationMode = ValuationMode.COLLATERALIZED,
    horizon: int = 10,
    max_workers: Optional[int] = None,
) -> List[PnlScenario]:
    """One P&L per overlapping ``horizon``-day window, revalued in ``mode``."""
    windows, pnl = _scenario_matrix(nset, curve, cfg, history, [(mode, nset.threshold)], horizon, max_workers)
    return [PnlScenario(w[0], w[1], w[2], w[3], float(p)) for w, p in zip(windows, pnl[:, 0])]


@dataclass
class VarSweepRow:
    label: str
    threshold: Optional[float]
    var: float
    magnitude: float


def var_sweep(
    nset: NettingSet,
    curve: ZeroCurve,
    cfg: LatticeConfig,
    history: Sequence[MarketShift],
    thresholds: Sequence[float],
    confidence: float = 0.99,
    horizon: int = 10,
    max_workers: Optional[int] = None,
) -> List[VarSweepRow]:
    """VaR without credit risk, with credit risk and under each CSA threshold."""
    hs = [float(h) for h in thresholds]
    if any(b < a for a, b in zip(hs, hs[1:])):
        raise ValueError(f"thresholds must be sorted ascending, got {hs}")
    modes = [(ValuationMode.RISK_FREE, math.inf), (ValuationMode.RISKY, math.inf)]
    modes += [(ValuationMode.COLLATERALIZED, h) for h in hs]
    _, pnl = _scenario_matrix(nset, curve, cfg, history, modes, horizon, max_workers)
    rows = []
    for col, (mode, h) in enumerate(modes):
        res = historical_var(pnl[:, col], confidence)
        label = {ValuationMode.RISK_FREE: "risk-free", ValuationMode.RISKY: "risky"}.get(mode, "csa")
        rows.append(VarSweepRow(label, None if mode is not ValuationMode.COLLATERALIZED else h, res.var, res.magnitude))
    return rows


def synth_history(
    n_days: int,
    seed: int = 42,
    rate_vol_bp: float = 5.0,
    credit_vol_bp: float = 1.0,
    correlation: float = 0.0,
    pillars: Optional[int] = None,
    start: date = date(2005, 1, 3),
) -> List[MarketShift]:
    """Daily market moves with normal shocks on business days from ``start``.

    Rates and credit share a common factor through ``correlation``. With
    ``pillars`` each curve pillar gets the common move plus its own noise.
    """
    if n_days < 1:
        raise ValueError(f"n_days must be positive, got {n_days}")
    if not -1.0 <= correlation <= 1.0:
        raise ValueError(f"correlation must be in [-1, 1], got {correlation}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_days, 2))
    rate = rate_vol_bp * z[:, 0]
    credit = credit_vol_bp * (correlation * z[:, 0] + math.sqrt(1.0 - correlation ** 2) * z[:, 1])
    noise = rng.standard_normal((n_days, pillars)) * 0.25 * rate_vol_bp if pillars else None

    out = []
    d = WEEKENDS.adjust(start)
    for i in range(n_days):
        curve_bp: Shift = float(rate[i]) if noise is None else tuple(float(rate[i] + e) for e in noise[i])
        out.append(MarketShift(d, curve_bp, float(credit[i])))
        d = WEEKENDS.adjust(d + timedelta(days=1), roll=Roll.FOLLOWING)
    return out


def synth_netting_set(
    curve: ZeroCurve,
    counterparty: Counterparty,
    n_trades: int = 5,
    seed: int = 42,
    notional: float = 10_000_000.0,
    max_years: int = 5,
    csa: Optional[CsaTerms] = None,
) -> NettingSet:
    """Random netting set whose value to the bank is positive.

    Bought caps, floors and payer swaptions plus receiver swaps struck above
    par. All trades start on the curve anchor (swaptions expire on a whole
    year) so their dates share one quarterly grid.
    """
    if n_trades < 1:
        raise ValueError(f"n_trades must be positive, got {n_trades}")
    if max_years < 1:
        raise ValueError(f"max_years must be at least 1, got {max_years}")
    rng = np.random.default_rng(seed)
    anchor = curve.anchor
    kinds = [TradeKind.CAP, TradeKind.FLOOR, TradeKind.EUROPEAN_SWAPTION, TradeKind.RECEIVER_SWAP]
    trades: List[Trade] = []
    for i in range(n_trades):
        kind = kinds[int(rng.integers(len(kinds)))]
        years = int(rng.integers(1, max_years + 1))
        size = float(notional * rng.uniform(0.5, 1.5))
        label = f"T{i + 1}"
        if kind is TradeKind.EUROPEAN_SWAPTION:
            expiry_years = int(rng.integers(1, max_years + 1))
            expiry = WEEKENDS.adjust(add_months(anchor, 12 * expiry_years))
            end = add_months(anchor, 12 * (expiry_years + years))
            fwd = market_par_rate(curve, expiry, end)
            strike = fwd + float(rng.uniform(-0.005, 0.005))
            trades.append(Trade(kind, size, expiry, end, strike, expiry=expiry, long=True,
                                underlying=TradeKind.PAYER_SWAP, label=label, counterparty=counterparty.name))
            continue
        end = add_months(anchor, 12 * years)
        par = market_par_rate(curve, anchor, end)
        if kind is TradeKind.RECEIVER_SWAP:
            rate = par + float(rng.uniform(0.002, 0.01))
        else:
            rate = par + float(rng.uniform(-0.005, 0.005))
        trades.append(Trade(kind, size, anchor, end, rate, float_frequency=Frequency.QUARTERLY,
                            long=True, label=label, counterparty=counterparty.name))
    return NettingSet(counterparty, csa, trades)


def scenario_table(scenarios: Sequence[PnlScenario]) -> List[Dict[str, object]]:
    return [{"start": s.start.isoformat(), "end": s.end.isoformat(), "pnl": s.pnl} for s in scenarios]
