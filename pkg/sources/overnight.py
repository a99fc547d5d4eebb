"""Overnight returns from opening and previous closing prices."""

from core.models import TimeSeriesPanel
from analysis.panel import overnight_returns
from .base import BaseExogSource, RawInputs
from .registry import ExogRegistry


class OvernightReturnSource(BaseExogSource):
    """Open_t / Close_{t-1} - 1; one date shorter than its inputs."""

    name = "on"
    requires = frozenset({"opens", "closes"})
    description = "overnight return"

    def _build(self, raw: RawInputs) -> TimeSeriesPanel:
        return overnight_returns(raw.opens, raw.closes)


ExogRegistry.register(OvernightReturnSource())
