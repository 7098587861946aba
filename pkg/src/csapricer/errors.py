"""Exception types shared across the package.

Validation problems stay ``ValueError`` subclasses so callers can keep
catching ``ValueError``; numerical failures are ``RuntimeError`` subclasses.
"""
from __future__ import annotations


class InputError(ValueError):
    """Malformed market data, trade terms or input files."""


class PricingError(ValueError):
    """Trade dates that do not line up with the lattice or the period grid."""


class CalibrationError(RuntimeError):
    """A root-find or calibration step failed to converge or bracket."""
