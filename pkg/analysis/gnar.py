"""GNAR-HARX design matrices, OLS estimation and stationarity diagnostics."""

import logging
import warnings
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from config import config
from core.errors import EstimationError, InputError, RankDeficiencyWarning
from core.models import (
    HAR_TERMS,
    FittedModel,
    ModelSpec,
    Network,
    SeriesStats,
    StationarityResult,
    TimeSeriesPanel,
    Variant,
)
from analysis.network import stage_weight_matrices


logger = logging.getLogger(__name__)


# --- HAR components ---


def har_components(y: TimeSeriesPanel, t: int, i: int) -> Tuple[float, float, float]:
    """
    Daily, weekly and monthly HAR components of node i at row t.

    daily = y[t-1], weekly = mean(y[t-5..t-2]), monthly = mean(y[t-22..t-6]).
    """
    if t < config.har_max_lag:
        raise InputError(f"insufficient history: row {t} needs {config.har_max_lag} lags")
    if t > y.n_dates:
        raise InputError(f"row {t} beyond panel of {y.n_dates} dates")
    v = y.values[:, i]
    return float(v[t - 1]), float(np.mean(v[t - 5 : t - 1])), float(np.mean(v[t - 22 : t - 5]))


def har_matrix(values: np.ndarray) -> np.ndarray:
    """HAR components for every (row, node) as a T x N x 3 array; rows before 22 are NaN."""
    values = np.asarray(values, dtype=float)
    n_rows, n_nodes = values.shape
    out = np.full((n_rows, n_nodes, 3), np.nan)
    first = config.har_max_lag
    if n_rows <= first:
        return out
    weekly = sliding_window_view(values, 4, axis=0).mean(axis=2)
    monthly = sliding_window_view(values, 17, axis=0).mean(axis=2)
    out[first:, :, 0] = values[first - 1 : n_rows - 1]
    out[first:, :, 1] = weekly[first - 5 : n_rows - 5]
    out[first:, :, 2] = monthly[first - 22 : n_rows - 22]
    return out


def _neighbour_average(component: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # Row-wise products summed over neighbours; each (t, i) depends on row t only.
    return (component[:, None, :] * weights[None, :, :]).sum(axis=2)


def _lagged(x: np.ndarray, lag: int) -> np.ndarray:
    if lag == 0:
        return x.copy()
    out = np.full_like(x, np.nan)
    out[lag:] = x[:-lag]
    return out


def node_features(
    y_values: np.ndarray,
    exog_values: Mapping[str, np.ndarray],
    weights: Sequence[np.ndarray],
    spec: ModelSpec,
) -> np.ndarray:
    """
    Per-node regressors in ``spec.terms`` order as a T x N x k array.

    Args:
        y_values: T x N response (log RV, possibly standardised)
        exog_values: T x N exogenous series keyed by name
        weights: stage weight matrices W^(1)..W^(r_max)
        spec: model specification

    Returns:
        Features; rows without full lag history contain NaN.
    """
    har = har_matrix(y_values)
    blocks = [har]
    for component, r_count in enumerate(spec.stages):
        for r in range(1, r_count + 1):
            blocks.append(_neighbour_average(har[:, :, component], weights[r - 1])[:, :, None])
    for exog in spec.exog:
        if exog.name not in exog_values:
            raise InputError(f"missing exogenous panel '{exog.name}'")
        x = np.asarray(exog_values[exog.name], dtype=float)
        if x.shape != y_values.shape:
            raise InputError(f"exogenous panel '{exog.name}' has shape {x.shape}, expected {y_values.shape}")
        for lag in exog.lags:
            blocks.append(_lagged(x, lag)[:, :, None])
    return np.concatenate(blocks, axis=2)


# --- Design matrices ---


@dataclass(frozen=True)
class Design:
    """Stacked regression rows ordered by (t, node)."""
    X: np.ndarray
    targets: np.ndarray
    rows: np.ndarray
    nodes: np.ndarray
    node_ids: Tuple[str, ...]
    spec: ModelSpec

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def row_index(self) -> List[Tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.nodes.tolist()))

    def node_block(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """Rows of node i with its own regression columns."""
        mask = self.nodes == i
        X = self.X[mask]
        if self.spec.variant == Variant.LOCAL:
            k = len(self.spec.terms)
            X = X[:, i * k : (i + 1) * k]
        return X, self.targets[mask]


def design_from_features(
    features: np.ndarray,
    y_values: np.ndarray,
    spec: ModelSpec,
    rows: Sequence[int],
    node_ids: Sequence[str],
) -> Design:
    """Lay out feature rows into the column structure of the spec's variant."""
    rows = np.asarray(rows, dtype=int)
    n_nodes = features.shape[1]
    k = features.shape[2]
    t_idx = np.repeat(rows, n_nodes)
    i_idx = np.tile(np.arange(n_nodes), rows.size)
    F = features[rows].reshape(-1, k)
    targets = np.asarray(y_values, dtype=float)[rows].reshape(-1)
    if not (np.all(np.isfinite(F)) and np.all(np.isfinite(targets))):
        raise InputError(f"insufficient history: design rows must start at or after {spec.first_row}")

    n = F.shape[0]
    line = np.arange(n)[:, None]
    if spec.variant == Variant.GLOBAL:
        X = F.copy()
    elif spec.variant == Variant.STANDARD:
        X = np.zeros((n, 3 * n_nodes + k - 3))
        X[line, 3 * i_idx[:, None] + np.arange(3)] = F[:, :3]
        X[:, 3 * n_nodes :] = F[:, 3:]
    else:
        X = np.zeros((n, n_nodes * k))
        X[line, k * i_idx[:, None] + np.arange(k)] = F

    return Design(X=X, targets=targets, rows=t_idx, nodes=i_idx, node_ids=tuple(node_ids), spec=spec)


def _check_aligned(y: TimeSeriesPanel, exog: Mapping[str, TimeSeriesPanel], net: Network) -> None:
    if net.n_nodes != y.n_nodes:
        raise InputError(f"network has {net.n_nodes} nodes, panel has {y.n_nodes}")
    for name, panel in exog.items():
        if panel.dates != y.dates:
            raise InputError(f"exogenous panel '{name}' is not aligned with the response dates")
        if panel.node_ids != y.node_ids:
            raise InputError(f"exogenous panel '{name}' nodes {list(panel.node_ids)} differ from {list(y.node_ids)}")


def build_design(
    y: TimeSeriesPanel,
    exog: Mapping[str, TimeSeriesPanel],
    net: Network,
    spec: ModelSpec,
    rows: Optional[Sequence[int]] = None,
) -> Design:
    """
    Build the GNAR-HARX regression for the given target rows.

    Rows default to every t from ``spec.first_row`` to the end of the panel.
    """
    _check_aligned(y, exog, net)
    weights = stage_weight_matrices(net, max(spec.stages))
    features = node_features(y.values, {k: v.values for k, v in exog.items()}, weights, spec)
    if rows is None:
        rows = range(spec.first_row, y.n_dates)
    rows = list(rows)
    if rows and min(rows) < spec.first_row:
        raise InputError(f"insufficient history: row {min(rows)} precedes first usable row {spec.first_row}")
    return design_from_features(features, y.values, spec, rows, y.node_ids)


def param_count(spec: ModelSpec, n: int) -> int:
    """Number of free coefficients of a variant on n nodes."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    shared = sum(spec.stages) + sum(len(e.lags) for e in spec.exog)
    if spec.variant == Variant.GLOBAL:
        return 3 + shared
    if spec.variant == Variant.STANDARD:
        return 3 * n + shared
    return n * (3 + shared)


# --- Estimation ---


def _solve(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, int]:
    cond = max(X.shape) * np.finfo(float).eps
    coef, _, rank, _ = linalg.lstsq(X, y, cond=cond, lapack_driver="gelsy")
    return coef, int(rank)


def _active_columns(X: np.ndarray) -> int:
    return int(np.count_nonzero(np.any(X != 0.0, axis=0)))


def _row_dot(X: np.ndarray, coef: np.ndarray) -> np.ndarray:
    return (X * coef[None, :]).sum(axis=1)


def fit_ols(
    design: Design,
    network: Network,
    standardisation: Optional[Dict[str, SeriesStats]] = None,
    train_range: Optional[Tuple[str, str]] = None,
) -> FittedModel:
    """
    Least-squares fit of a GNAR-HARX design.

    The local variant runs one regression per node; global and standard
    variants are single pooled regressions. Rank-deficient designs get the
    minimum-norm solution and a RankDeficiencyWarning.

    Per-node residual variance is SS_i / (T_i - k) with k the number of
    columns of node i's regression that are not identically zero. Empty
    neighbour stages therefore cost no degrees of freedom and are not
    reported as rank deficiency.
    """
    spec = design.spec
    n_nodes = design.n_nodes
    resid = np.empty_like(design.targets)
    rank_deficient = False

    if spec.variant == Variant.LOCAL:
        n_cols = len(spec.terms)
        active = []
        blocks = []
        for i in range(n_nodes):
            X_i, y_i = design.node_block(i)
            if X_i.shape[0] < n_cols:
                raise EstimationError(
                    f"node={design.node_ids[i]}: {X_i.shape[0]} rows for {n_cols} columns"
                )
            coef_i, rank = _solve(X_i, y_i)
            active.append(_active_columns(X_i))
            rank_deficient |= rank < active[-1]
            resid[design.nodes == i] = y_i - _row_dot(X_i, coef_i)
            blocks.append(coef_i)
        coef = np.concatenate(blocks)
    else:
        n_cols = design.X.shape[1]
        if design.X.shape[0] < n_cols:
            raise EstimationError(f"{design.X.shape[0]} rows for {n_cols} columns")
        coef, rank = _solve(design.X, design.targets)
        active = [_active_columns(design.X)] * n_nodes
        rank_deficient = rank < active[0]
        resid = design.targets - _row_dot(design.X, coef)

    resid_var = []
    for i, k in enumerate(active):
        r_i = resid[design.nodes == i]
        dof = r_i.size - k
        if dof <= 0:
            raise EstimationError(
                f"node={design.node_ids[i]}: no residual degrees of freedom ({r_i.size} rows, {k} columns)"
            )
        resid_var.append(float(np.sum(r_i**2) / dof))

    if rank_deficient:
        msg = f"rank-deficient design ({spec.variant.value}); using minimum-norm coefficients"
        if train_range:
            msg += f" train_range={train_range[0]}..{train_range[1]}"
        logger.warning(msg)
        warnings.warn(msg, RankDeficiencyWarning)

    keys = spec.coefficient_keys(list(design.node_ids))
    return FittedModel(
        spec=spec,
        node_ids=list(design.node_ids),
        coefficients={key: float(c) for key, c in zip(keys, coef)},
        resid_var=resid_var,
        standardisation=standardisation or {},
        network=network,
        train_range=train_range,
        rank_deficient=rank_deficient,
    )


def coefficient_vector(model: FittedModel) -> np.ndarray:
    """Coefficients in design-column order."""
    return np.array(list(model.coefficients.values()), dtype=float)


def fitted_values(design: Design, model: FittedModel) -> np.ndarray:
    return _row_dot(design.X, coefficient_vector(model))


# --- Effective per-node coefficients ---


def expand_coefficients(spec: ModelSpec, coefficients: Mapping[str, float], node_ids: Sequence[str]) -> np.ndarray:
    """
    Effective coefficient matrix (N x k) in ``spec.terms`` order.

    Raises InputError unless the keys are exactly those of the variant layout.
    """
    expected = spec.coefficient_keys(list(node_ids))
    missing = [key for key in expected if key not in coefficients]
    extra = [key for key in coefficients if key not in set(expected)]
    if missing or extra:
        raise InputError(f"coefficient keys do not match the {spec.variant.value} layout: "
                         f"missing={missing} unexpected={extra}")
    terms = spec.terms
    out = np.empty((len(node_ids), len(terms)))
    for i, node in enumerate(node_ids):
        for j, term in enumerate(terms):
            out[i, j] = coefficients.get(f"{term}:{node}", coefficients.get(term))
    return out


def node_coefficients(model: FittedModel) -> np.ndarray:
    return expand_coefficients(model.spec, model.coefficients, model.node_ids)


def predict(features: np.ndarray, coef_matrix: np.ndarray) -> np.ndarray:
    """One-step predictions (rows x N) from features (rows x N x k)."""
    return (features * coef_matrix[None, :, :]).sum(axis=2)


def stationarity_margins(spec: ModelSpec, coef_matrix: np.ndarray) -> np.ndarray:
    """Per-node sum of absolute autoregressive and network coefficients."""
    n_ar = len(HAR_TERMS) + len(spec.network_terms)
    return np.abs(coef_matrix[:, :n_ar]).sum(axis=1)


def stationarity_check(model: FittedModel) -> List[StationarityResult]:
    """Strict inequality margin < 1 per node; a diagnostic only."""
    margins = stationarity_margins(model.spec, node_coefficients(model))
    return [
        StationarityResult(node=node, margin=float(m), stationary=bool(m < 1.0))
        for node, m in zip(model.node_ids, margins)
    ]
