"""Implied volatility as an exogenous predictor."""

from core.models import TimeSeriesPanel
from .base import BaseExogSource, RawInputs
from .registry import ExogRegistry


class ImpliedVolSource(BaseExogSource):
    """Option-implied volatility index per node, used as given."""

    name = "iv"
    requires = frozenset({"iv"})
    description = "implied volatility index"

    def _build(self, raw: RawInputs) -> TimeSeriesPanel:
        return raw.iv


ExogRegistry.register(ImpliedVolSource())
