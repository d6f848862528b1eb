"""Analytic and Monte Carlo QBER models for underwater optical QKD links."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    CurvePoint,
    SecureDistanceResult,
    correlation_curve,
    max_secure_distance,
    qber_curve,
    source_position_sweep,
)
from .channel_model import WATER_PROFILES, SystemConfig, WaterProfile, link_budget  # noqa: E402
from .config import default_system, load_config  # noqa: E402

__all__ = [
    "CurvePoint",
    "SecureDistanceResult",
    "SystemConfig",
    "WATER_PROFILES",
    "WaterProfile",
    "correlation_curve",
    "default_system",
    "link_budget",
    "load_config",
    "max_secure_distance",
    "qber_curve",
    "source_position_sweep",
    "__version__",
]
