"""Base class for exogenous-variable sources."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import FrozenSet, Optional

from core.errors import InputError
from core.models import TimeSeriesPanel


@dataclass(frozen=True)
class RawInputs:
    """Raw panels an exogenous variable can be derived from."""
    returns: Optional[TimeSeriesPanel] = None
    opens: Optional[TimeSeriesPanel] = None
    closes: Optional[TimeSeriesPanel] = None
    iv: Optional[TimeSeriesPanel] = None

    def present(self) -> FrozenSet[str]:
        return frozenset(name for name in ("returns", "opens", "closes", "iv") if getattr(self, name) is not None)


class BaseExogSource(ABC):
    """Abstract base class for all exogenous sources."""

    # Subclasses must define these
    name: str
    requires: FrozenSet[str]
    description: str = ""

    def can_build(self, raw: RawInputs) -> bool:
        return self.requires <= raw.present()

    def build(self, raw: RawInputs) -> TimeSeriesPanel:
        """
        Build the exogenous panel.

        Args:
            raw: Available raw panels

        Returns:
            Panel of the exogenous series, one column per node
        """
        missing = self.requires - raw.present()
        if missing:
            raise InputError(f"exogenous source '{self.name}' needs inputs: {sorted(missing)}")
        return self._build(raw)

    @abstractmethod
    def _build(self, raw: RawInputs) -> TimeSeriesPanel:
        pass
