"""Descriptive statistics, residual checks and network persistence."""

from typing import Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from statsmodels.tsa.stattools import acf, pacf

from core.errors import InputError
from core.models import BacktestResult, Network, TimeSeriesPanel
from analysis.network import edge_count, jaccard


N_LAGS = 3


def _moments(x: np.ndarray) -> dict:
    return {
        "mean": float(np.mean(x)),
        "std": float(np.std(x, ddof=1)),
        "skew": float(stats.skew(x)),
        "kurtosis": float(stats.kurtosis(x, fisher=False)),
    }


def summary_statistics(panel: TimeSeriesPanel) -> pd.DataFrame:
    """Per-node moments plus ACF and PACF at lags 1..3."""
    if panel.n_dates <= 2 * N_LAGS + 1:
        raise InputError(f"need more than {2 * N_LAGS + 1} dates for summary statistics")
    rows = []
    for i, node in enumerate(panel.node_ids):
        x = panel.values[:, i]
        row = {"node": node, **_moments(x)}
        autocorr = acf(x, nlags=N_LAGS, fft=False)
        partial = pacf(x, nlags=N_LAGS)
        for lag in range(1, N_LAGS + 1):
            row[f"acf{lag}"] = float(autocorr[lag])
        for lag in range(1, N_LAGS + 1):
            row[f"pacf{lag}"] = float(partial[lag])
        rows.append(row)
    return pd.DataFrame(rows).set_index("node")


def log_residuals(result: BacktestResult) -> TimeSeriesPanel:
    """Out-of-sample log RV minus log-space forecast."""
    return result.log_forecasts.with_values(np.log(result.actuals.values) - result.log_forecasts.values)


def residual_diagnostics(result: BacktestResult) -> pd.DataFrame:
    residuals = log_residuals(result)
    if residuals.n_dates < 2:
        raise InputError("need at least 2 out-of-sample dates for residual diagnostics")
    rows = [
        {"node": node, **_moments(residuals.values[:, i])}
        for i, node in enumerate(residuals.node_ids)
    ]
    return pd.DataFrame(rows).set_index("node")


def network_stats(networks: Sequence[Tuple[str, Network]]) -> pd.DataFrame:
    """
    Edge counts and Jaccard similarity with the previous network.

    The first row has no predecessor, so its Jaccard entry is NaN.
    """
    if not networks:
        raise InputError("no networks to summarise")
    rows = []
    previous = None
    for refit_date, net in networks:
        rows.append({
            "refit_date": refit_date,
            "edge_count": edge_count(net),
            "jaccard": np.nan if previous is None else jaccard(previous, net),
        })
        previous = net
    return pd.DataFrame(rows, columns=["refit_date", "edge_count", "jaccard"])
