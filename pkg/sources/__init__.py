"""Exogenous-variable sources."""

from .base import BaseExogSource, RawInputs
from .registry import ExogRegistry

# Import sources (auto-registers them)
from .implied_vol import ImpliedVolSource
from .returns import BadReturnSource, GoodReturnSource
from .overnight import OvernightReturnSource

__all__ = [
    "BaseExogSource",
    "RawInputs",
    "ExogRegistry",
    "ImpliedVolSource",
    "GoodReturnSource",
    "BadReturnSource",
    "OvernightReturnSource",
]
