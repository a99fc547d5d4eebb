"""Rolling-window GNAR-HARX backtests with log-space back-transformation."""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from core.errors import EstimationError, InputError, LookAheadWarning
from core.models import (
    BacktestResult,
    ModelSpec,
    Network,
    NetworkMode,
    RefitRecord,
    RollingConfig,
    SeriesStats,
    TimeSeriesPanel,
)
from analysis.glasso import estimate_network, select_rho
from analysis.gnar import design_from_features, fit_ols, node_coefficients, node_features, predict
from analysis.network import empty_network, fully_connected, stage_weight_matrices
from analysis.standardise import column_stats, destandardise, standardise_window

__all__ = ["standardise_window", "destandardise", "jensen_backtransform", "run_backtest", "refit_origins"]

logger = logging.getLogger(__name__)


def jensen_backtransform(y_hat_log, sigma2_log):
    """exp(y_hat + sigma^2 / 2): the conditionally unbiased level forecast under Gaussian log errors."""
    sigma2 = np.asarray(sigma2_log, dtype=float)
    if np.any(sigma2 < 0):
        raise InputError(f"log-space variance must be nonnegative, got {sigma2_log}")
    return np.exp(np.asarray(y_hat_log, dtype=float) + sigma2 / 2.0)


def refit_origins(n_dates: int, initial_window: int, block: int) -> List[int]:
    """First forecast row of every block; the final block may be partial."""
    return list(range(initial_window, n_dates, block))


@dataclass
class _Block:
    record: RefitRecord
    log_forecast: np.ndarray
    forecast: np.ndarray


class _Backtest:
    """State shared by every refit block of one run."""

    def __init__(
        self,
        log_rv: TimeSeriesPanel,
        exog: Mapping[str, TimeSeriesPanel],
        returns: Optional[TimeSeriesPanel],
        spec: ModelSpec,
        cfg: RollingConfig,
    ):
        self.log_rv = log_rv
        self.exog = exog
        self.returns = returns
        self.spec = spec
        self.cfg = cfg
        self.node_ids = log_rv.node_ids
        self.rho: Optional[float] = None
        if cfg.network_mode == NetworkMode.FULLY_CONNECTED:
            self.fixed_network: Optional[Network] = fully_connected(log_rv.n_nodes, self.node_ids)
        elif cfg.network_mode == NetworkMode.EMPTY:
            self.fixed_network = empty_network(log_rv.n_nodes, self.node_ids)
        else:
            self.fixed_network = None

    def select_rho(self) -> None:
        if self.cfg.network_mode != NetworkMode.GRAPHICAL_LASSO:
            return
        if self.cfg.glasso_rho is not None:
            self.rho = self.cfg.glasso_rho
            return
        self.rho = select_rho(
            self.returns.rows(0, self.cfg.initial_window),
            n_folds=self.cfg.cv_folds,
            tol=self.cfg.glasso_tol,
            max_iter=self.cfg.glasso_max_iter,
        )
        logger.info("glasso rho selected on initial window: rho=%.6g", self.rho)

    def _network(self, start: int, stop: int) -> Tuple[Network, Optional[bool]]:
        if self.fixed_network is not None:
            return self.fixed_network, None
        network, fit = estimate_network(
            self.returns.rows(start, stop),
            self.rho,
            tol=self.cfg.glasso_tol,
            max_iter=self.cfg.glasso_max_iter,
            zero_tol=self.cfg.zero_tol,
        )
        return network, fit.converged

    def _stats(self, values: np.ndarray, start: int, stop: int, series: str) -> Tuple[np.ndarray, np.ndarray]:
        if not self.cfg.standardise:
            return np.zeros(values.shape[1]), np.ones(values.shape[1])
        return column_stats(values[start:stop], [f"{series} node={n}" for n in self.node_ids])

    def run_block(self, origin: int) -> _Block:
        dates = self.log_rv.dates
        stop = min(origin + self.cfg.block, self.log_rv.n_dates)
        start = origin - self.cfg.refit_window
        refit_date = dates[origin]
        # Inputs are validated before any block runs; failures here belong to this window.
        try:
            return self._fit_and_forecast(origin, stop, start)
        except (EstimationError, InputError) as e:
            raise EstimationError(f"refit_date={refit_date}: {e}") from e

    def _fit_and_forecast(self, origin: int, stop: int, start: int) -> _Block:
        dates = self.log_rv.dates
        network, converged = self._network(start, origin)

        # Window statistics are frozen for the whole block; only rows < stop are used.
        y = self.log_rv.values[:stop]
        y_mean, y_std = self._stats(y, start, origin, "log_rv")
        standardisation: Dict[str, SeriesStats] = {
            "log_rv": SeriesStats(mean=y_mean.tolist(), std=y_std.tolist())
        }
        y_z = (y - y_mean) / y_std
        exog_z = {}
        for name in self.spec.exog_names:
            x = self.exog[name].values[:stop]
            m, s = self._stats(x, start, origin, name)
            standardisation[name] = SeriesStats(mean=m.tolist(), std=s.tolist())
            exog_z[name] = (x - m) / s

        weights = stage_weight_matrices(network, max(self.spec.stages))
        features = node_features(y_z, exog_z, weights, self.spec)
        train_rows = range(max(start, self.spec.first_row), origin)
        design = design_from_features(features, y_z, self.spec, train_rows, self.node_ids)
        model = fit_ols(design, network, standardisation, train_range=(dates[start], dates[origin - 1]))

        z_hat = predict(features[origin:stop], node_coefficients(model))
        log_hat = z_hat * y_std + y_mean
        sigma2_log = y_std**2 * np.asarray(model.resid_var)
        rv_hat = jensen_backtransform(log_hat, sigma2_log[None, :])
        if not (np.all(np.isfinite(rv_hat)) and np.all(rv_hat > 0)):
            raise EstimationError("forecast is not finite and positive")

        logger.info(
            "refit_date=%s train=%s..%s edges=%d forecasts=%d",
            dates[origin], dates[start], dates[origin - 1], len(network.edges), stop - origin,
        )
        record = RefitRecord(
            refit_date=dates[origin],
            train_start=dates[start],
            train_end=dates[origin - 1],
            coefficients=model.coefficients,
            network=network,
            resid_var_std=model.resid_var,
            resid_var_log=sigma2_log.tolist(),
            rho=self.rho,
            glasso_converged=converged,
            rank_deficient=model.rank_deficient,
        )
        return _Block(record=record, log_forecast=log_hat, forecast=rv_hat)


def _check_inputs(
    log_rv: TimeSeriesPanel,
    exog: Mapping[str, TimeSeriesPanel],
    returns: Optional[TimeSeriesPanel],
    spec: ModelSpec,
    cfg: RollingConfig,
) -> Tuple[Dict[str, TimeSeriesPanel], Optional[TimeSeriesPanel]]:
    if log_rv.n_dates <= cfg.initial_window:
        raise InputError(
            f"need more than initial_window={cfg.initial_window} dates, got {log_rv.n_dates}"
        )
    if cfg.refit_window <= 22 + spec.max_exog_lag:
        raise InputError(
            f"refit_window={cfg.refit_window} must exceed 22 + max exogenous lag ({spec.max_exog_lag})"
        )

    def aligned(name: str, panel: TimeSeriesPanel) -> TimeSeriesPanel:
        if panel.dates != log_rv.dates:
            raise InputError(f"panel '{name}' is not aligned with log RV dates")
        if set(panel.node_ids) != set(log_rv.node_ids):
            raise InputError(f"panel '{name}' nodes differ from log RV nodes")
        return panel.reorder(log_rv.node_ids)

    contemporaneous = [e.name for e in spec.exog if 0 in e.lags]
    if contemporaneous:
        msg = f"exogenous lag 0 for {contemporaneous}: forecasts for date t use X_t"
        logger.warning(msg)
        warnings.warn(msg, LookAheadWarning)

    missing = [name for name in spec.exog_names if name not in exog]
    if missing:
        raise InputError(f"missing exogenous panels: {missing}")
    exog = {name: aligned(name, exog[name]) for name in spec.exog_names}

    if cfg.network_mode == NetworkMode.GRAPHICAL_LASSO:
        if returns is None:
            raise InputError("graphical_lasso network mode needs a returns panel")
        returns = aligned("returns", returns)
    return exog, returns


def run_backtest(
    log_rv: TimeSeriesPanel,
    exog: Mapping[str, TimeSeriesPanel],
    returns: Optional[TimeSeriesPanel],
    spec: ModelSpec,
    cfg: RollingConfig,
    threads: int = 1,
) -> BacktestResult:
    """
    Rolling-window one-step-ahead backtest.

    Forecast origins start at ``cfg.initial_window`` and advance by
    ``cfg.block``. Each origin refits on the preceding ``cfg.refit_window``
    rows and forecasts every date of its block from observed lags with the
    frozen model. Blocks are independent once rho is fixed, so they may run
    on a thread pool; results are assembled in date order.
    """
    exog, returns = _check_inputs(log_rv, exog, returns, spec, cfg)
    run = _Backtest(log_rv, exog, returns, spec, cfg)
    run.select_rho()

    origins = refit_origins(log_rv.n_dates, cfg.initial_window, cfg.block)
    logger.info(
        "backtest: nodes=%d dates=%d refits=%d network=%s variant=%s threads=%d",
        log_rv.n_nodes, log_rv.n_dates, len(origins), cfg.network_mode.value, spec.variant.value, threads,
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run.run_block, origins))
    else:
        blocks = [run.run_block(o) for o in origins]

    dates = log_rv.dates[cfg.initial_window :]
    node_ids = log_rv.node_ids
    return BacktestResult(
        spec=spec,
        network_mode=cfg.network_mode,
        forecasts=TimeSeriesPanel(node_ids, dates, np.concatenate([b.forecast for b in blocks])),
        actuals=TimeSeriesPanel(node_ids, dates, np.exp(log_rv.values[cfg.initial_window :])),
        log_forecasts=TimeSeriesPanel(node_ids, dates, np.concatenate([b.log_forecast for b in blocks])),
        refits=[b.record for b in blocks],
    )
