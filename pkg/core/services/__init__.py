"""Services shared by the CLI commands."""

from .ingest import IngestReport, IngestService
from .backtest import BacktestService
from .simulation import SimulationService

__all__ = ["IngestReport", "IngestService", "BacktestService", "SimulationService"]
