from __future__ import annotations

import os
from typing import Optional

THREADS_ENV = "CSA_PRICER_THREADS"
DEFAULT_SEED = 42


def thread_limit(requested: Optional[int] = None) -> int:
    """Worker count for scenario and sweep revaluation.

    ``CSA_PRICER_THREADS`` caps whatever the caller asks for.
    """
    env = os.environ.get(THREADS_ENV)
    cap = None
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if cap < 1:
            raise ValueError(f"{THREADS_ENV} must be at least 1, got {cap}")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if n < 1:
        raise ValueError(f"worker count must be at least 1, got {n}")
    return min(n, cap) if cap is not None else n
