"""Monte Carlo validation of the analytic QBER models.

The pulse loops run in a compiled extension when it is built and fall back
to a numpy implementation otherwise; both produce identical counts.
"""

from .core import (
    BACKEND,
    PROTOCOLS,
    McConfig,
    McResult,
    available_backends,
    default_backend,
    simulate,
    simulate_bb84,
    simulate_bbm92,
    simulate_sarg04,
)
from .rng import derive_seed

__all__ = [
    "BACKEND",
    "PROTOCOLS",
    "McConfig",
    "McResult",
    "available_backends",
    "default_backend",
    "derive_seed",
    "simulate",
    "simulate_bb84",
    "simulate_bbm92",
    "simulate_sarg04",
]
