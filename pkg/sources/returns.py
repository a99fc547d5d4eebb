"""Signed daily-return components."""

from core.models import TimeSeriesPanel
from analysis.panel import split_returns
from .base import BaseExogSource, RawInputs
from .registry import ExogRegistry


class GoodReturnSource(BaseExogSource):
    name = "good"
    requires = frozenset({"returns"})
    description = "positive part of daily returns"

    def _build(self, raw: RawInputs) -> TimeSeriesPanel:
        return split_returns(raw.returns)[0]


class BadReturnSource(BaseExogSource):
    name = "bad"
    requires = frozenset({"returns"})
    description = "negative part of daily returns"

    def _build(self, raw: RawInputs) -> TimeSeriesPanel:
        return split_returns(raw.returns)[1]


ExogRegistry.register(GoodReturnSource())
ExogRegistry.register(BadReturnSource())
