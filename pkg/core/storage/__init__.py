"""Storage layer for panels, networks and backtest artefacts."""

from .files import FileStore, read_intraday, read_network_json, read_panel_csv, write_panel_csv
from .repositories import BacktestRepository, NetworkRepository, PanelRepository, RankingRepository

__all__ = [
    "FileStore",
    "read_intraday",
    "read_network_json",
    "read_panel_csv",
    "write_panel_csv",
    "BacktestRepository",
    "NetworkRepository",
    "PanelRepository",
    "RankingRepository",
]
