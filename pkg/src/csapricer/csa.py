"""CSA terms and the two collateral laws: posting and default payment.

Collateral is posted by the counterparty only (unilateral CSA) and earns the
risk-free rate. Both laws accept scalars or numpy arrays of node values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class CsaTerms:
    threshold: float
    mta: float = 0.0
    independent_amount: float = 0.0
    counterparty: Optional[str] = None

    def __post_init__(self):
        if self.mta < 0:
            raise InputError(f"minimum transfer amount must be non-negative, got {self.mta}")
        if math.isnan(self.threshold) or math.isnan(self.independent_amount):
            raise InputError("CSA threshold and independent amount must be numbers")

    @property
    def effective_threshold(self) -> float:
        return effective_threshold(self)

    @classmethod
    def uncollateralized(cls, counterparty: Optional[str] = None) -> "CsaTerms":
        return cls(threshold=math.inf, counterparty=counterparty)

    @classmethod
    def with_threshold(cls, h: float, counterparty: Optional[str] = None) -> "CsaTerms":
        """Terms whose effective threshold is exactly ``h``."""
        return cls(threshold=h, counterparty=counterparty)


def effective_threshold(terms: Optional[CsaTerms]) -> float:
    """H = threshold + MTA - independent amount; no CSA means H = +inf."""
    if terms is None:
        return math.inf
    return terms.threshold + terms.mta - terms.independent_amount


def collateral_amount(value, H: float):
    """Collateral held against a mark-to-market ``value``: max(value - H, 0)."""
    if math.isinf(H) and H > 0:
        return np.zeros_like(np.asarray(value, dtype=float)) if np.ndim(value) else 0.0
    out = np.maximum(np.asarray(value, dtype=float) - H, 0.0)
    return out if np.ndim(value) else float(out)


def default_payment(X, C, recovery: float):
    """Amount received on counterparty default: recovery on the claim plus
    the unrecovered share covered by collateral."""
    if not 0.0 <= recovery < 1.0:
        raise ValueError(f"recovery must be in [0, 1), got {recovery}")
    out = recovery * np.asarray(X, dtype=float) + np.asarray(C, dtype=float) * (1.0 - recovery)
    return out if np.ndim(out) else float(out)
