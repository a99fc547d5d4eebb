"""Registry for exogenous-variable sources."""

from typing import Dict, List

from core.errors import InputError
from .base import BaseExogSource, RawInputs


class ExogRegistry:
    """Registry of exogenous sources keyed by name."""

    _sources: Dict[str, BaseExogSource] = {}

    @classmethod
    def register(cls, source: BaseExogSource) -> None:
        """Register a source; later registrations with the same name are ignored."""
        cls._sources.setdefault(source.name, source)

    @classmethod
    def get(cls, name: str) -> BaseExogSource:
        try:
            return cls._sources[name]
        except KeyError:
            raise InputError(f"unknown exogenous variable '{name}'; known: {cls.names()}") from None

    @classmethod
    def names(cls) -> List[str]:
        return sorted(cls._sources)

    @classmethod
    def available(cls, raw: RawInputs) -> List[str]:
        """Names of sources buildable from the given inputs."""
        return [name for name in cls.names() if cls._sources[name].can_build(raw)]
