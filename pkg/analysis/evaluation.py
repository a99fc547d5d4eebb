"""Forecast loss functions and model-comparison rankings."""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from core.errors import InputError
from core.models import BacktestResult, LossSummary, NodeLoss, TimeSeriesPanel


logger = logging.getLogger(__name__)

PanelLike = Union[TimeSeriesPanel, np.ndarray, float]


def _values(x: PanelLike) -> np.ndarray:
    return x.values if isinstance(x, TimeSeriesPanel) else np.asarray(x, dtype=float)


def _pair(actual: PanelLike, forecast: PanelLike) -> Tuple[np.ndarray, np.ndarray]:
    a, f = _values(actual), _values(forecast)
    if isinstance(actual, TimeSeriesPanel) and isinstance(forecast, TimeSeriesPanel):
        if actual.dates != forecast.dates or actual.node_ids != forecast.node_ids:
            raise InputError("actual and forecast panels are not aligned")
    if a.shape != f.shape:
        raise InputError(f"shape mismatch: actual {a.shape} vs forecast {f.shape}")
    return a, f


def qlike_terms(actual: PanelLike, forecast: PanelLike) -> np.ndarray:
    """Elementwise log(RV_hat) + RV / RV_hat."""
    a, f = _pair(actual, forecast)
    if np.any(f <= 0):
        raise InputError("QLIKE needs strictly positive forecasts")
    if np.any(a <= 0):
        raise InputError("QLIKE needs strictly positive realised variances")
    return np.log(f) + a / f


def qlike(actual: PanelLike, forecast: PanelLike) -> float:
    """Mean quasi-likelihood loss over all nodes and dates."""
    return float(np.mean(qlike_terms(actual, forecast)))


def mse(actual: PanelLike, forecast: PanelLike) -> float:
    a, f = _pair(actual, forecast)
    return float(np.mean((a - f) ** 2))


def relative(value: float, best: float) -> float:
    """1 + (value - best) / |best|; equals value / best for positive losses."""
    if best == 0:
        return 1.0 if value == 0 else float("inf")
    return 1.0 + (value - best) / abs(best)


class ModelComparator:
    """Ranks backtests on a common evaluation sample."""

    def rank(self, results: Sequence[Tuple[str, BacktestResult, int]]) -> List[LossSummary]:
        """Losses, relative ratios against the best per metric, ordered by QLIKE then label."""
        if not results:
            return []
        self._check_common_sample(results)

        summaries = [self._summarise(label, result, n_params) for label, result, n_params in results]
        best_qlike = min(s.qlike for s in summaries)
        best_mse = min(s.mse for s in summaries)
        for s in summaries:
            s.rel_qlike = relative(s.qlike, best_qlike)
            s.rel_mse = relative(s.mse, best_mse)

        ranked = sorted(summaries, key=lambda s: (s.qlike, s.label))
        for position, s in enumerate(ranked, 1):
            logger.info("rank=%d label=%s qlike=%.6g mse=%.6g", position, s.label, s.qlike, s.mse)
        return ranked

    def _check_common_sample(self, results: Sequence[Tuple[str, BacktestResult, int]]) -> None:
        labels = [label for label, _, _ in results]
        if len(set(labels)) != len(labels):
            raise InputError(f"duplicate model labels: {labels}")
        ref_label, ref, _ = results[0]
        for label, result, _ in results[1:]:
            if result.forecasts.dates != ref.forecasts.dates:
                raise InputError(f"model '{label}' is evaluated on different dates than '{ref_label}'")
            if result.forecasts.node_ids != ref.forecasts.node_ids:
                raise InputError(f"model '{label}' has different nodes than '{ref_label}'")

    def _summarise(self, label: str, result: BacktestResult, n_params: int) -> LossSummary:
        actual, forecast = result.actuals, result.forecasts
        q = qlike_terms(actual, forecast)
        e2 = (actual.values - forecast.values) ** 2
        per_node = {
            node: NodeLoss(qlike=float(np.mean(q[:, i])), mse=float(np.mean(e2[:, i])))
            for i, node in enumerate(actual.node_ids)
        }
        return LossSummary(
            label=label,
            model=result.family,
            variant=result.spec.variant.value,
            network=result.network_mode.value,
            exogenous=result.spec.exog_names,
            qlike=float(np.mean(q)),
            mse=float(np.mean(e2)),
            n_params=n_params,
            per_node=per_node,
        )


def rank_models(results: Sequence[Tuple[str, BacktestResult, int]]) -> List[LossSummary]:
    return ModelComparator().rank(results)
