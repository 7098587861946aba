__all__ = [
    "InputError",
    "PricingError",
    "CalibrationError",
    "DayCount",
    "Frequency",
    "Roll",
    "Calendar",
    "generate_schedule",
    "year_fraction",
    "CurveInstrument",
    "InstrumentKind",
    "ZeroCurve",
    "bootstrap_curve",
    "discount_factor",
    "par_swap_rate",
    "market_par_rate",
    "CdsQuote",
    "HazardCurve",
    "Counterparty",
    "bootstrap_hazards",
    "survival_prob",
    "CsaTerms",
    "effective_threshold",
    "collateral_amount",
    "default_payment",
    "LatticeConfig",
    "RateLattice",
    "build_lattice",
    "Trade",
    "TradeKind",
    "NettingSet",
    "ValuationMode",
    "risk_adjusted_ratio",
    "value_single_period",
    "backward_induction",
    "netting_set_value",
    "price_collateralized",
    "solve_collateralized_par_rate",
    "CvaReport",
    "cva",
    "threshold_sweep",
    "historical_var",
    "pnl_scenarios",
    "var_sweep",
    "SwapPair",
    "premium_spread",
    "ols",
    "RegressionResult",
    "synth_pair_dataset",
]

from .errors import InputError, PricingError, CalibrationError
from .dates import DayCount, Frequency, Roll, Calendar, generate_schedule, year_fraction
from .curve import (
    CurveInstrument,
    InstrumentKind,
    ZeroCurve,
    bootstrap_curve,
    discount_factor,
    par_swap_rate,
    market_par_rate,
)
from .credit import CdsQuote, HazardCurve, Counterparty, bootstrap_hazards, survival_prob
from .csa import CsaTerms, effective_threshold, collateral_amount, default_payment
from .lattice import LatticeConfig, RateLattice, build_lattice
from .trades import Trade, TradeKind
from .pricing import (
    NettingSet,
    ValuationMode,
    risk_adjusted_ratio,
    value_single_period,
    backward_induction,
    netting_set_value,
    price_collateralized,
    solve_collateralized_par_rate,
)
from .risk import CvaReport, cva, threshold_sweep, historical_var, pnl_scenarios, var_sweep
from .analysis import SwapPair, premium_spread, ols, RegressionResult, synth_pair_dataset
