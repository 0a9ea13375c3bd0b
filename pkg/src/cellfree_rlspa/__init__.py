"""Robust least-squares power allocation for user-centric cell-free massive MIMO."""

from .config import SystemConfig
from .errors import (
    ConfigError,
    Divergence,
    NonConvergence,
    NumericalFailure,
    SingularChannel,
    SingularSystem,
)

__version__ = "0.1.0"

__all__ = [
    "SystemConfig",
    "ConfigError",
    "Divergence",
    "NonConvergence",
    "NumericalFailure",
    "SingularChannel",
    "SingularSystem",
]
