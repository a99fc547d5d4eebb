"""Ingest service - raw CSVs to aligned response and exogenous panels."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from sources import ExogRegistry, RawInputs
from analysis.diagnostics import summary_statistics
from analysis.panel import align, log_transform, rv_panel_from_intraday
from core.errors import InputError
from core.models import InputPaths, TimeSeriesPanel
from core.storage import FileStore, PanelRepository, read_intraday, read_panel_csv


logger = logging.getLogger(__name__)


@dataclass
class IngestReport:
    """Aligned panels plus the dates each input lost to alignment."""
    panels: Dict[str, TimeSeriesPanel]
    dropped: Dict[str, int]
    skipped: List[str]

    @property
    def log_rv(self) -> TimeSeriesPanel:
        return self.panels["log_rv"]

    @property
    def returns(self) -> Optional[TimeSeriesPanel]:
        return self.panels.get("returns")

    def exog(self) -> Dict[str, TimeSeriesPanel]:
        return {k: v for k, v in self.panels.items() if k not in ("log_rv", "returns")}


class IngestService:
    """Builds the panels a backtest needs from raw inputs."""

    def _read(self, path: Optional[str]) -> Optional[TimeSeriesPanel]:
        return read_panel_csv(path) if path else None

    def _log_rv(self, inputs: InputPaths) -> TimeSeriesPanel:
        if inputs.intraday:
            rv = rv_panel_from_intraday(read_intraday(inputs.intraday), inputs.intraday_base_spacing)
            return log_transform(rv)
        if inputs.rv:
            return log_transform(read_panel_csv(inputs.rv))
        if inputs.log_rv:
            return read_panel_csv(inputs.log_rv)
        raise InputError("inputs need one of 'intraday', 'rv' or 'log_rv'")

    def build(self, inputs: InputPaths, exogenous: Sequence[str]) -> IngestReport:
        """
        Read, derive and align all panels.

        Args:
            inputs: raw input locations
            exogenous: names of exogenous sources to derive

        Returns:
            IngestReport; requested sources whose raw inputs are absent are skipped.
        """
        log_rv = self._log_rv(inputs)
        raw = RawInputs(
            returns=self._read(inputs.returns),
            opens=self._read(inputs.opens),
            closes=self._read(inputs.closes),
            iv=self._read(inputs.iv),
        )

        panels: Dict[str, TimeSeriesPanel] = {"log_rv": log_rv}
        if raw.returns is not None:
            panels["returns"] = raw.returns
        skipped = []
        for name in exogenous:
            source = ExogRegistry.get(name)
            if not source.can_build(raw):
                logger.warning("exogenous=%s skipped: needs %s", name, sorted(source.requires))
                skipped.append(name)
                continue
            panels[name] = source.build(raw)

        aligned = align(panels)
        logger.info("ingest: nodes=%d dates=%d panels=%s",
                    log_rv.n_nodes, len(aligned.dates), ",".join(aligned.panels))
        return IngestReport(panels=aligned.panels, dropped=aligned.dropped, skipped=skipped)

    def load(self, panel_dir: str, names: Sequence[str]) -> IngestReport:
        """Reload previously ingested panels, re-aligned."""
        repo = PanelRepository(FileStore(panel_dir))
        panels = {"log_rv": repo.load("log_rv")}
        for name in ["returns", *names]:
            if name in panels:
                continue
            if repo.exists(name):
                panels[name] = repo.load(name)
            elif name != "returns":
                raise InputError(f"panel '{name}' not found in {panel_dir}")
        aligned = align(panels)
        return IngestReport(panels=aligned.panels, dropped=aligned.dropped, skipped=[])

    def save(self, report: IngestReport, out_dir: str) -> List[str]:
        store = FileStore(out_dir)
        repo = PanelRepository(store)
        written = [repo.save(name, panel) for name, panel in report.panels.items()]
        written.append(store.write_csv("summary_stats.csv", summary_statistics(report.log_rv), index=True))
        return written
