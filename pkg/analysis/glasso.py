"""Graphical lasso estimation of sparse precision matrices from daily returns."""

import logging
import warnings
from typing import Optional, Sequence

import numpy as np
from numba import njit
from scipy import linalg

from config import config
from core.errors import ConvergenceWarning, EstimationError, InputError
from core.models import GlassoFit, Network, TimeSeriesPanel
from analysis.standardise import column_stats


logger = logging.getLogger(__name__)


@njit(cache=True)
def _lasso_cd(gram, target, rho, beta, max_iter, tol):
    """Cyclic coordinate descent for 0.5 b'Gb - t'b + rho * |b|_1 (in place)."""
    p = target.shape[0]
    for it in range(max_iter):
        max_delta = 0.0
        for k in range(p):
            r = target[k]
            for l in range(p):
                if l != k:
                    r -= gram[k, l] * beta[l]
            if r > rho:
                new = (r - rho) / gram[k, k]
            elif r < -rho:
                new = (r + rho) / gram[k, k]
            else:
                new = 0.0
            delta = abs(new - beta[k])
            if delta > max_delta:
                max_delta = delta
            beta[k] = new
        if max_delta < tol:
            return it + 1
    return max_iter


def glasso_objective(S: np.ndarray, precision: np.ndarray, rho: float) -> float:
    """log det(Theta) - tr(S Theta) - rho * sum of off-diagonal |Theta|."""
    sign, logdet = np.linalg.slogdet(precision)
    if sign <= 0:
        return -np.inf
    off_l1 = np.abs(precision).sum() - np.abs(np.diag(precision)).sum()
    return float(logdet - np.sum(S * precision) - rho * off_l1)


def glasso_fit(
    S: np.ndarray,
    rho: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> GlassoFit:
    """
    Maximise log det(Theta) - tr(S Theta) - rho * ||Theta||_1 (off-diagonal).

    Block coordinate descent over the columns of the covariance estimate W,
    each column solved as a lasso by cyclic coordinate descent. Converged when
    the largest elementwise change of W over a sweep is below tol.
    """
    tol = config.glasso_tol if tol is None else tol
    max_iter = config.glasso_max_iter if max_iter is None else max_iter

    S = np.array(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InputError(f"Covariance must be square, got shape {S.shape}")
    scale = max(1.0, float(np.max(np.abs(S))))
    if not np.allclose(S, S.T, atol=1e-8 * scale, rtol=0.0):
        raise InputError("Covariance matrix is not symmetric")
    if rho < 0:
        raise InputError(f"rho must be nonnegative, got {rho}")
    S = 0.5 * (S + S.T)
    p = S.shape[0]

    if rho == 0:
        try:
            precision = linalg.inv(S)
        except linalg.LinAlgError as e:
            raise EstimationError(f"Unpenalised precision requires an invertible covariance: {e}") from None
        precision = 0.5 * (precision + precision.T)
        objective = glasso_objective(S, precision, 0.0)
        return GlassoFit(precision, S.copy(), 0.0, 0, True, (objective,))

    covariance = 0.95 * S
    covariance.flat[:: p + 1] = np.diag(S)
    precision = linalg.pinvh(covariance)

    indices = np.arange(p)
    trace = []
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        previous = covariance.copy()
        for j in range(p):
            rest = indices != j
            gram = np.ascontiguousarray(covariance[np.ix_(rest, rest)])
            target = np.ascontiguousarray(S[rest, j])
            beta = np.ascontiguousarray(-precision[rest, j] / precision[j, j])
            _lasso_cd(gram, target, rho, beta, config.lasso_max_iter, config.lasso_tol)

            w12 = gram @ beta
            covariance[rest, j] = w12
            covariance[j, rest] = w12
            theta_jj = 1.0 / (covariance[j, j] - w12 @ beta)
            precision[j, j] = theta_jj
            precision[rest, j] = -theta_jj * beta
            precision[j, rest] = -theta_jj * beta

        if not np.all(np.isfinite(precision)):
            raise EstimationError("Graphical lasso diverged: the covariance is too ill-conditioned")
        trace.append(glasso_objective(S, precision, rho))
        if np.max(np.abs(covariance - previous)) < tol:
            converged = True
            break

    if not converged:
        msg = f"graphical lasso did not converge after {max_iter} iterations (rho={rho:.4g})"
        logger.warning(msg)
        warnings.warn(msg, ConvergenceWarning)

    return GlassoFit(
        precision=precision,
        covariance=covariance,
        rho=float(rho),
        iterations=iteration,
        converged=converged,
        objective_trace=tuple(trace),
    )


def standardised_covariance(values: np.ndarray, names: Sequence[str]) -> np.ndarray:
    """Sample covariance (ddof=1) of per-column standardised data."""
    means, stds = column_stats(values, names)
    z = (values - means) / stds
    return np.atleast_2d(np.cov(z, rowvar=False))


def default_rho_grid(S: np.ndarray) -> np.ndarray:
    """Log-spaced grid from rho_grid_min_ratio * m to m, m = max off-diagonal |S|."""
    off = np.abs(S - np.diag(np.diag(S)))
    m = float(off.max()) if off.size else 0.0
    if m <= 0:
        return np.array([0.0])
    return np.geomspace(config.rho_grid_min_ratio * m, m, config.rho_grid_size)


def select_rho(
    returns_window: TimeSeriesPanel,
    n_folds: Optional[int] = None,
    grid: Optional[Sequence[float]] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> float:
    """
    Choose rho by contiguous-block cross-validation.

    Each candidate is fitted on the standardised covariance of the retained
    rows and scored by the held-out Gaussian log-likelihood
    log det(Theta) - tr(S_held Theta), with held-out rows standardised by the
    training statistics. Returns the candidate with the best mean score.
    """
    n_folds = config.cv_folds if n_folds is None else n_folds
    values = returns_window.values
    n_rows, n_nodes = values.shape
    if n_folds < 2:
        raise InputError(f"n_folds must be at least 2, got {n_folds}")
    if n_rows < n_folds * n_nodes:
        raise InputError(
            f"Window of {n_rows} rows is too short for {n_folds} folds over {n_nodes} nodes"
        )

    names = returns_window.node_ids
    if grid is None:
        grid = default_rho_grid(standardised_covariance(values, names))
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise InputError("rho grid is empty")
    if np.any(grid < 0):
        raise InputError("rho grid values must be nonnegative")

    folds = np.array_split(np.arange(n_rows), n_folds)
    scores = np.zeros((grid.size, n_folds))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for k, held in enumerate(folds):
            train = np.setdiff1d(np.arange(n_rows), held)
            means, stds = column_stats(values[train], names)
            s_train = np.atleast_2d(np.cov((values[train] - means) / stds, rowvar=False))
            s_held = np.atleast_2d(np.cov((values[held] - means) / stds, rowvar=False, bias=True))
            for g, rho in enumerate(grid):
                try:
                    fit = glasso_fit(s_train, rho, tol=tol, max_iter=max_iter)
                except EstimationError:
                    scores[g, k] = -np.inf
                    continue
                sign, logdet = np.linalg.slogdet(fit.precision)
                scores[g, k] = logdet - np.sum(s_held * fit.precision) if sign > 0 else -np.inf

    mean_scores = scores.mean(axis=1)
    best = int(np.argmax(mean_scores))
    logger.info("select_rho: rho=%.6g score=%.6g grid_size=%d folds=%d",
                grid[best], mean_scores[best], grid.size, n_folds)
    return float(grid[best])


def to_network(fit: GlassoFit, zero_tol: Optional[float] = None, labels: Optional[Sequence[str]] = None) -> Network:
    """Edge (i, j) whenever |Theta_ij| exceeds zero_tol."""
    zero_tol = config.zero_tol if zero_tol is None else zero_tol
    p = fit.precision.shape[0]
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(p))
    edges = tuple(
        (i, j) for i in range(p) for j in range(i + 1, p) if abs(fit.precision[i, j]) > zero_tol
    )
    return Network(nodes=labels, edges=edges)


def estimate_network(
    returns_window: TimeSeriesPanel,
    rho: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    zero_tol: Optional[float] = None,
) -> tuple[Network, GlassoFit]:
    """Graphical lasso network from one window of returns."""
    S = standardised_covariance(returns_window.values, returns_window.node_ids)
    fit = glasso_fit(S, rho, tol=tol, max_iter=max_iter)
    return to_network(fit, zero_tol, returns_window.node_ids), fit
