"""Swap premium spreads across counterparties and the spread regressions.

A swap pair is one set of swap terms traded with two different CSA
counterparties. Its premium spread is the difference of the two fixed rates,
since the generic mid-market rate cancels.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .credit import CdsQuote, Counterparty, par_cds_spread
from .csa import CsaTerms
from .curve import ZeroCurve, market_par_rate
from .dates import add_months
from .lattice import LatticeConfig, RateLattice, build_lattice
from .pricing import solve_collateralized_par_rate
from .trades import Trade, TradeKind

logger = logging.getLogger(__name__)

BP = 1e-4


@dataclass(frozen=True)
class SwapPair:
    """Identical swap terms with two counterparties.

    ``terms`` carries everything but the fixed rate; rates are filled in from
    dealer quotes (``market_rate_*``) or the collateralized solver (``model_rate_*``).
    """
    terms: Trade
    party_a: Counterparty
    party_b: Counterparty
    csa_a: Optional[CsaTerms] = None
    csa_b: Optional[CsaTerms] = None
    market_rate_a: Optional[float] = None
    market_rate_b: Optional[float] = None
    model_rate_a: Optional[float] = None
    model_rate_b: Optional[float] = None
    label: str = ""

    def swapped(self) -> "SwapPair":
        return SwapPair(self.terms, self.party_b, self.party_a, self.csa_b, self.csa_a,
                        self.market_rate_b, self.market_rate_a, self.model_rate_b, self.model_rate_a, self.label)

    def rates(self, source: str = "market") -> Tuple[float, float]:
        if source not in ("market", "model"):
            raise ValueError(f"rate source must be 'market' or 'model', got {source!r}")
        a, b = getattr(self, f"{source}_rate_a"), getattr(self, f"{source}_rate_b")
        if a is None or b is None:
            raise ValueError(f"pair {self.label!r} has no {source} rates")
        return a, b


def premium_spread(pair: SwapPair, generic_rate: float, source: str = "market") -> float:
    """Premium of counterparty B minus premium of counterparty A, in bp."""
    a, b = pair.rates(source)
    return ((b - generic_rate) - (a - generic_rate)) / BP


def premia(pair: SwapPair, generic_rate: float, source: str = "market") -> Tuple[float, float]:
    a, b = pair.rates(source)
    return (a - generic_rate) / BP, (b - generic_rate) / BP


@dataclass
class RegressionResult:
    slope: float
    intercept: float
    r2: float
    adj_r2: float
    t_value: float
    p_value: float
    f_stat: float
    f_significance: float
    n: int
    slope_stderr: float
    residuals: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def to_dict(self) -> Dict[str, float]:
        return {
            "Coefficient": self.slope,
            "Intercept": self.intercept,
            "R Square": self.r2,
            "Adjusted R Square": self.adj_r2,
            "t Stat": self.t_value,
            "P-value": self.p_value,
            "F": self.f_stat,
            "Significance F": self.f_significance,
            "Observations": self.n,
        }


def ols(x: Sequence[float], y: Sequence[float]) -> RegressionResult:
    """Fit y = a + b x + e by least squares with the usual one-regressor statistics."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be 1-d and the same length, got {x.shape} and {y.shape}")
    n = x.size
    if n < 3:
        raise ValueError(f"regression needs at least 3 observations, got {n}")
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx <= 0.0:
        raise ValueError("regressor is constant; the normal equations are singular")
    dy = y - y.mean()
    slope = float(dx @ dy) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    sse = float(resid @ resid)
    sst = float(dy @ dy)
    dof = n - 2

    if sst == 0.0:
        return RegressionResult(0.0, intercept, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, n, 0.0, resid)
    r2 = 1.0 - sse / sst
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof
    if sse == 0.0:
        return RegressionResult(slope, intercept, 1.0, 1.0, math.copysign(math.inf, slope), 0.0, math.inf, 0.0, n, 0.0, resid)
    se = math.sqrt(sse / dof / sxx)
    t_value = slope / se
    p_value = float(2.0 * stats.t.sf(abs(t_value), dof))
    f_stat = (sst - sse) / (sse / dof)
    f_sig = float(stats.f.sf(f_stat, 1, dof))
    return RegressionResult(slope, intercept, r2, adj, t_value, p_value, f_stat, f_sig, n, se, resid)


def _lattice_key(terms: Trade) -> Trade:
    return terms.with_rate(0.0)


def price_pairs(
    pairs: Sequence[SwapPair],
    curve: ZeroCurve,
    cfg: LatticeConfig,
) -> List[SwapPair]:
    """Fill in collateralized par rates for both sides of every pair."""
    lattices: Dict[Trade, RateLattice] = {}
    out = []
    for pair in pairs:
        key = _lattice_key(pair.terms)
        if key not in lattices:
            dates = [d for d in key.lattice_dates() if d >= curve.anchor]
            lattices[key] = build_lattice(curve, cfg, max(dates), dates)
        lattice = lattices[key]
        a = solve_collateralized_par_rate(pair.terms, pair.party_a, pair.csa_a, lattice, curve)
        b = solve_collateralized_par_rate(pair.terms, pair.party_b, pair.csa_b, lattice, curve)
        out.append(replace(pair, model_rate_a=a, model_rate_b=b))
    logger.info("priced %d swap pairs on %d lattices", len(out), len(lattices))
    return out


def cds_difference_bp(pair: SwapPair, curve: ZeroCurve) -> float:
    """CDS spread of B minus A at the swap's maturity, in bp."""
    tenor = curve.time(pair.terms.maturity)
    a = par_cds_spread(pair.party_a.hazard_curve, tenor, curve)
    b = par_cds_spread(pair.party_b.hazard_curve, tenor, curve)
    return (b - a) / BP


def synth_pair_dataset(
    n: int,
    curve: ZeroCurve,
    seed: int = 42,
    cds_range_bp: Tuple[float, float] = (10.0, 300.0),
    recovery_range: Tuple[float, float] = (0.3, 0.5),
    thresholds: Sequence[float] = (0.0, 0.0, 1e6, 5e6, math.inf),
    tenors_years: Sequence[int] = (2, 5, 10),
    notional: float = 25_000_000.0,
) -> List[SwapPair]:
    """Seeded receiver-swap pairs with random CDS levels, recoveries and CSA thresholds.

    Each counterparty is calibrated to a single flat CDS quote at the swap
    tenor.
    """
    if n < 1:
        raise ValueError(f"need at least one pair, got {n}")
    lo, hi = cds_range_bp
    if not 0 <= lo < hi:
        raise ValueError(f"CDS range must satisfy 0 <= low < high, got {cds_range_bp}")
    rng = np.random.default_rng(seed)
    anchor = curve.anchor
    pairs = []
    for i in range(n):
        years = int(tenors_years[int(rng.integers(len(tenors_years)))])
        maturity = add_months(anchor, 12 * years)
        terms = Trade(TradeKind.RECEIVER_SWAP, notional, anchor, maturity, 0.0, label=f"P{i + 1}")
        sides = []
        for side in ("A", "B"):
            spread = float(rng.uniform(lo, hi)) * BP
            recovery = float(rng.uniform(*recovery_range))
            h = float(thresholds[int(rng.integers(len(thresholds)))])
            name = f"P{i + 1}{side}"
            party = Counterparty.calibrate(name, recovery, [CdsQuote(float(years), spread)], curve)
            sides.append((party, CsaTerms(threshold=h, counterparty=name)))
        (pa, ca), (pb, cb) = sides
        pairs.append(SwapPair(terms, pa, pb, ca, cb, label=f"P{i + 1}"))
    return pairs


def synth_market_rates(pairs: Sequence[SwapPair], seed: int = 42, noise_bp: float = 0.05) -> List[SwapPair]:
    """Dealer quotes: model rates plus independent normal noise."""
    rng = np.random.default_rng(seed)
    out = []
    for p in pairs:
        a, b = p.rates("model")
        ea, eb = rng.normal(0.0, noise_bp, size=2) * BP
        out.append(replace(p, market_rate_a=a + float(ea), market_rate_b=b + float(eb)))
    return out


def spread_summary(values: Sequence[float]) -> Dict[str, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot summarise an empty sample")
    return {
        "max": float(v.max()),
        "min": float(v.min()),
        "mean": float(v.mean()),
        "median": float(np.median(v)),
        "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
    }


@dataclass
class PairStudy:
    market_spreads: np.ndarray
    model_spreads: np.ndarray
    cds_differences: np.ndarray
    market_on_cds: RegressionResult
    market_on_model: RegressionResult

    def summaries(self) -> Dict[str, Dict[str, float]]:
        return {
            "market_spread": spread_summary(self.market_spreads),
            "model_spread": spread_summary(self.model_spreads),
            "differential": spread_summary(self.model_spreads - self.market_spreads),
        }


def regress_pairs(pairs: Sequence[SwapPair], curve: ZeroCurve) -> PairStudy:
    """Market spread regressed on CDS difference and on model spread.

    Pairs must carry both market and model rates.
    """
    market = np.array([premium_spread(p, 0.0, "market") for p in pairs])
    model = np.array([premium_spread(p, 0.0, "model") for p in pairs])
    cds = np.array([cds_difference_bp(p, curve) for p in pairs])
    return PairStudy(market, model, cds, ols(cds, market), ols(model, market))


def generic_rate(pair: SwapPair, curve: ZeroCurve) -> float:
    t = pair.terms
    return market_par_rate(curve, t.effective, t.maturity, t.convention)
