"""Window standardisation shared by network estimation and forecasting."""

from typing import Tuple

import numpy as np

from core.errors import InputError


def standardise_window(series: np.ndarray, name: str = "series") -> Tuple[np.ndarray, float, float]:
    """
    Standardise a vector with its own sample mean and std (ddof=1).

    Returns (z, mean, std).
    """
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise InputError(f"Cannot standardise {name}: need at least 2 observations")
    mean = float(np.mean(x))
    std = float(np.std(x, ddof=1))
    if not np.isfinite(std) or std <= 1e-12 * max(1.0, abs(mean)):
        raise InputError(f"Cannot standardise {name}: zero standard deviation in window")
    return (x - mean) / std, mean, std


def destandardise(z: np.ndarray, mean: float, std: float) -> np.ndarray:
    return np.asarray(z, dtype=float) * std + mean


def column_stats(values: np.ndarray, names) -> Tuple[np.ndarray, np.ndarray]:
    """Per-column (mean, std) of a T x N block, validated like standardise_window."""
    means = np.empty(values.shape[1])
    stds = np.empty(values.shape[1])
    for k, name in enumerate(names):
        _, means[k], stds[k] = standardise_window(values[:, k], name)
    return means, stds
