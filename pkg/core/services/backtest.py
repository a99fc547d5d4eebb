"""Backtest service - runs configured models, persists artefacts and ranks them."""

import logging
from typing import List, Optional, Tuple

from analysis.evaluation import rank_models
from analysis.forecast import run_backtest
from analysis.gnar import param_count
from core.models import BacktestResult, LossSummary, ModelEntry, RunConfig
from core.storage import BacktestRepository, FileStore, RankingRepository
from .ingest import IngestReport, IngestService


logger = logging.getLogger(__name__)


class BacktestService:
    """Business logic for backtesting and evaluation. Shared by the CLI commands."""

    def __init__(self, ingest: Optional[IngestService] = None):
        self.ingest = ingest or IngestService()

    def _panels(self, run: RunConfig) -> IngestReport:
        needed = sorted({name for m in run.models for name in m.spec.exog_names})
        if run.inputs.panel_dir:
            return self.ingest.load(run.inputs.panel_dir, needed)
        return self.ingest.build(run.inputs, needed)

    def run_model(self, entry: ModelEntry, panels: IngestReport, run: RunConfig) -> BacktestResult:
        rolling = run.rolling.model_copy(update={"network_mode": entry.network})
        logger.info("model=%s variant=%s network=%s", entry.label, entry.spec.variant.value, entry.network.value)
        return run_backtest(
            panels.log_rv,
            panels.exog(),
            panels.returns,
            entry.spec,
            rolling,
            threads=run.threads,
        )

    def run(self, run: RunConfig) -> List[LossSummary]:
        """
        Backtest every configured model and write outputs under run.output_dir.

        Each model's files are written only after all of its blocks complete.
        """
        panels = self._panels(run)
        store = FileStore(run.output_dir)
        repo = BacktestRepository(store)

        evaluated: List[Tuple[str, BacktestResult, int]] = []
        for entry in run.models:
            result = self.run_model(entry, panels, run)
            n_params = param_count(entry.spec, panels.log_rv.n_nodes)
            repo.save(entry.label, result, n_params)
            evaluated.append((entry.label, result, n_params))

        summaries = rank_models(evaluated)
        RankingRepository(store).save(summaries)
        return summaries

    def evaluate(self, output_dir: str) -> List[LossSummary]:
        """Re-rank every model saved under output_dir."""
        store = FileStore(output_dir)
        repo = BacktestRepository(store)
        evaluated = []
        for label in repo.labels():
            result, n_params = repo.load(label)
            evaluated.append((label, result, n_params))
        summaries = rank_models(evaluated)
        RankingRepository(store).save(summaries)
        return summaries
