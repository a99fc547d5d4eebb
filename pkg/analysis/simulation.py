"""Synthetic GNAR-HARX processes with known parameters."""

import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
import pandas as pd
from scipy import linalg

from config import config
from core.errors import EstimationError, InputError
from core.models import ModelSpec, Network, SimSpec, TimeSeriesPanel
from analysis.gnar import expand_coefficients, stationarity_margins
from analysis.network import fully_connected, stage_weight_matrices


logger = logging.getLogger(__name__)

# Lags carried by each HAR component and the averaging divisor.
_COMPONENT_LAGS = ((range(1, 2), 1.0), (range(2, 6), 4.0), (range(6, 23), 17.0))


@dataclass(frozen=True)
class SimulatedPanels:
    log_rv: TimeSeriesPanel
    exog: Dict[str, TimeSeriesPanel]
    returns: TimeSeriesPanel
    network: Network


def lag_operators(spec: ModelSpec, coef_matrix: np.ndarray, network: Network) -> np.ndarray:
    """
    Linear map from the last 22 log-RV vectors to the autoregressive part.

    Returns A with shape (22, N, N); A[l - 1] multiplies y_{t-l}.
    """
    n_nodes = coef_matrix.shape[0]
    operators = np.zeros((config.har_max_lag, n_nodes, n_nodes))
    weights = stage_weight_matrices(network, max(spec.stages))

    col = 3
    for component, ((lags, divisor), r_count) in enumerate(zip(_COMPONENT_LAGS, spec.stages)):
        own = np.diag(coef_matrix[:, component])
        for lag in lags:
            operators[lag - 1] += own / divisor
        for r in range(1, r_count + 1):
            coupled = coef_matrix[:, col][:, None] * weights[r - 1]
            for lag in lags:
                operators[lag - 1] += coupled / divisor
            col += 1
    return operators


def _ar1_path(gen: np.random.Generator, phi: float, noise_std: float, length: int) -> np.ndarray:
    x = np.empty(length)
    eps = gen.standard_normal(length)
    x[0] = eps[0] * noise_std / np.sqrt(1.0 - phi**2)
    for t in range(1, length):
        x[t] = phi * x[t - 1] + noise_std * eps[t]
    return x


def _return_covariance(network: Network, coupling: float) -> np.ndarray:
    adjacency = network.adjacency()
    max_degree = max(1.0, float(adjacency.sum(axis=1).max()))
    precision = np.eye(network.n_nodes) - coupling * adjacency / max_degree
    return linalg.inv(precision)


def simulate(spec: SimSpec) -> SimulatedPanels:
    """
    Iterate the GNAR-HARX recursion forward from 22 zero lags.

    Exogenous drivers are stationary AR(1) processes generated first. Every
    node and every (exogenous variable, node) pair draws from its own Philox
    stream spawned from the seed, so output does not depend on loop order.
    The first ``burn_in`` rows are discarded.
    """
    model = spec.spec
    node_ids = spec.resolved_node_ids()
    n_nodes = spec.n_nodes
    network = spec.network or fully_connected(n_nodes, node_ids)

    coef = expand_coefficients(model, spec.coefficients, node_ids)
    margins = stationarity_margins(model, coef)
    worst = int(np.argmax(margins))
    if margins[worst] >= 1.0:
        raise InputError(
            f"non-stationary coefficients: node={node_ids[worst]} margin={margins[worst]:.6g} (must be < 1)"
        )

    total = spec.burn_in + spec.length
    n_exog = len(model.exog)
    streams = [
        np.random.Generator(np.random.Philox(child))
        for child in np.random.SeedSequence(spec.seed).spawn(n_nodes * (2 + n_exog))
    ]
    noise_streams = streams[:n_nodes]
    return_streams = streams[n_nodes : 2 * n_nodes]

    exog_paths: Dict[str, np.ndarray] = {}
    forcing = np.zeros((total, n_nodes))
    col = 3 + sum(model.stages)
    for h, exog in enumerate(model.exog):
        gen_spec = spec.exog[exog.name]
        path = np.column_stack([
            _ar1_path(streams[(2 + h) * n_nodes + i], gen_spec.phi, gen_spec.noise_std, total)
            for i in range(n_nodes)
        ])
        exog_paths[exog.name] = path
        for lag in exog.lags:
            shifted = np.zeros_like(path)
            shifted[lag:] = path[: total - lag]
            forcing += coef[:, col][None, :] * shifted
            col += 1

    noise = spec.noise_vector()[None, :] * np.column_stack(
        [g.standard_normal(total) for g in noise_streams]
    )

    operators = lag_operators(model, coef, network)
    lag_map = operators.transpose(1, 0, 2).reshape(n_nodes, -1)
    p = config.har_max_lag
    y = np.zeros((p + total, n_nodes))
    for t in range(total):
        history = y[t : p + t][::-1].reshape(-1)
        y[p + t] = lag_map @ history + forcing[t] + noise[t]

    log_rv = y[p + spec.burn_in :]
    if not np.all(np.isfinite(log_rv)):
        raise EstimationError("simulated path diverged")

    innovations = np.column_stack([g.standard_normal(spec.length) for g in return_streams])
    chol = linalg.cholesky(_return_covariance(network, spec.return_coupling), lower=True)
    returns = np.exp(log_rv / 2.0) * (innovations @ chol.T)

    dates = tuple(pd.bdate_range(spec.start_date, periods=spec.length).strftime("%Y-%m-%d"))
    ids = tuple(node_ids)
    logger.info(
        "simulate: nodes=%d length=%d burn_in=%d seed=%d max_margin=%.4f",
        n_nodes, spec.length, spec.burn_in, spec.seed, margins[worst],
    )
    return SimulatedPanels(
        log_rv=TimeSeriesPanel(ids, dates, log_rv),
        exog={name: TimeSeriesPanel(ids, dates, path[spec.burn_in :]) for name, path in exog_paths.items()},
        returns=TimeSeriesPanel(ids, dates, returns),
        network=network,
    )
