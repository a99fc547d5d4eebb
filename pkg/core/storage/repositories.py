"""Data access layer for panels, networks and backtest artefacts."""

import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config
from core.errors import InputError
from core.models import BacktestResult, LossSummary, ModelSpec, Network, NetworkMode, TimeSeriesPanel
from analysis.diagnostics import log_residuals, residual_diagnostics
from .files import FileStore, network_to_json, read_network_json, read_panel_csv, write_panel_csv


class PanelRepository:
    """Wide panel CSVs named ``<name>.csv``."""

    def __init__(self, store: FileStore):
        self.store = store

    def save(self, name: str, panel: TimeSeriesPanel) -> str:
        path = self.store.path(f"{name}.csv")
        write_panel_csv(panel, path)
        return path

    def load(self, name: str) -> TimeSeriesPanel:
        return read_panel_csv(self.store.path(f"{name}.csv"))

    def exists(self, name: str) -> bool:
        return self.store.exists(f"{name}.csv")


class NetworkRepository:
    """Dated network JSON files in one directory."""

    def __init__(self, store: FileStore):
        self.store = store

    def save(self, refit_date: str, net: Network) -> str:
        return self.store.write_text(f"{refit_date}.json", network_to_json(net))

    def save_trajectory(self, trajectory: Sequence[Tuple[str, Network]]) -> None:
        for refit_date, net in trajectory:
            self.save(refit_date, net)

    @staticmethod
    def load_dir(directory: str) -> List[Tuple[str, Network]]:
        """All ``<date>.json`` files in date order."""
        try:
            names = sorted(f for f in os.listdir(directory) if f.endswith(".json"))
        except OSError as e:
            raise InputError(f"Cannot list network directory {directory}: {e}") from None
        if not names:
            raise InputError(f"No network files in {directory}")
        return [(name[: -len(".json")], read_network_json(os.path.join(directory, name))) for name in names]


def _long_frame(panels: Dict[str, TimeSeriesPanel]) -> pd.DataFrame:
    """Date-major long format with one column per panel."""
    first = next(iter(panels.values()))
    n_dates, n_nodes = first.values.shape
    frame = pd.DataFrame({
        "date": np.repeat(np.array(first.dates, dtype=object), n_nodes),
        "node": np.tile(np.array(first.node_ids, dtype=object), n_dates),
    })
    for column, panel in panels.items():
        frame[column] = panel.values.reshape(-1)
    return frame


class BacktestRepository:
    """Per-model backtest outputs under ``<root>/<label>/``."""

    FORECASTS = "forecasts.csv"
    SUMMARY = "summary.json"

    def __init__(self, store: FileStore):
        self.store = store

    def model_store(self, label: str) -> FileStore:
        return FileStore(config.get_output_path(label, self.store.root))

    def save(self, label: str, result: BacktestResult, n_params: int) -> str:
        """Write every artefact of one backtest; returns the model directory."""
        out = self.model_store(label)

        out.write_csv(self.FORECASTS, _long_frame({
            "rv_actual": result.actuals,
            "rv_forecast": result.forecasts,
            "logrv_forecast": result.log_forecasts,
        }))

        out.write_csv("coefficients.csv", pd.DataFrame(
            [(date, key, value) for date, coefs in result.coefficient_trajectory for key, value in coefs.items()],
            columns=["refit_date", "coefficient_key", "value"],
        ))

        node_ids = result.forecasts.node_ids
        out.write_csv("residual_var.csv", pd.DataFrame(
            [
                (r.refit_date, node, r.resid_var_std[i], r.resid_var_log[i])
                for r in result.refits
                for i, node in enumerate(node_ids)
            ],
            columns=["refit_date", "node", "resid_var_std", "resid_var_log"],
        ))

        out.write_csv("residuals.csv", _long_frame({"residual": log_residuals(result)}))
        if result.forecasts.n_dates >= 2:
            out.write_csv("residual_stats.csv", residual_diagnostics(result), index=True)

        NetworkRepository(out.subdir("networks")).save_trajectory(result.network_trajectory)

        out.write_json(self.SUMMARY, {
            "label": label,
            "family": result.family,
            "variant": result.spec.variant.value,
            "network": result.network_mode.value,
            "exogenous": result.spec.exog_names,
            "n_params": n_params,
            "node_ids": list(node_ids),
            "refits": len(result.refits),
            "rho": next((r.rho for r in result.refits if r.rho is not None), None),
            "spec": result.spec.model_dump(mode="json"),
        })
        return out.root

    def load(self, label: str) -> Tuple[BacktestResult, int]:
        """Forecast panels and model description from a saved run (refit state is not restored)."""
        out = self.model_store(label)
        if not out.exists(self.SUMMARY) or not out.exists(self.FORECASTS):
            raise InputError(f"No saved backtest for '{label}' in {out.root}")
        summary = out.read_json(self.SUMMARY)
        frame = out.read_csv(self.FORECASTS, dtype={"date": str, "node": str})
        node_ids = tuple(summary["node_ids"])

        def panel(column: str) -> TimeSeriesPanel:
            if column not in frame.columns:
                raise InputError(f"{out.path(self.FORECASTS)} missing column '{column}'")
            wide = frame.pivot(index="date", columns="node", values=column).sort_index()
            return TimeSeriesPanel.from_frame(wide[list(node_ids)])

        result = BacktestResult(
            spec=ModelSpec.model_validate(summary["spec"]),
            network_mode=NetworkMode(summary["network"]),
            forecasts=panel("rv_forecast"),
            actuals=panel("rv_actual"),
            log_forecasts=panel("logrv_forecast"),
        )
        return result, int(summary["n_params"])

    def labels(self) -> List[str]:
        """Labels of every saved model under the root."""
        found = []
        for name in sorted(os.listdir(self.store.root)):
            summary = os.path.join(self.store.root, name, self.SUMMARY)
            if os.path.isfile(summary):
                found.append(FileStore(os.path.join(self.store.root, name)).read_json(self.SUMMARY)["label"])
        return found


class RankingRepository:
    """Model comparison tables at the output root."""

    COLUMNS = ["label", "model", "variant", "network", "exogenous", "qlike", "mse", "rel_qlike", "rel_mse", "n_params"]

    def __init__(self, store: FileStore):
        self.store = store

    def save(self, summaries: Sequence[LossSummary]) -> Optional[str]:
        rows = [
            {**s.model_dump(exclude={"per_node", "exogenous"}), "exogenous": ";".join(s.exogenous)}
            for s in summaries
        ]
        path = self.store.write_csv("ranking.csv", pd.DataFrame(rows, columns=self.COLUMNS))
        self.store.write_csv("node_losses.csv", pd.DataFrame(
            [
                (s.label, node, loss.qlike, loss.mse)
                for s in summaries
                for node, loss in s.per_node.items()
            ],
            columns=["label", "node", "qlike", "mse"],
        ))
        return path
