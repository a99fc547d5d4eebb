import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import global_sim_spec, make_panel
from analysis.forecast import (
    destandardise,
    jensen_backtransform,
    refit_origins,
    run_backtest,
    standardise_window,
)
from analysis.gnar import build_design, fit_ols, fitted_values
from analysis.simulation import simulate
from core.errors import EstimationError, InputError, LookAheadWarning, RankDeficiencyWarning
from core.models import ExogSpec, ModelSpec, NetworkMode, RollingConfig, TimeSeriesPanel, Variant


GLOBAL_IV = ModelSpec(variant=Variant.GLOBAL, stages=(1, 1, 1), exog=(ExogSpec(name="iv", lags=(1,)),))


def _rolling(**kwargs):
    fields = dict(initial_window=200, refit_window=150, block=22)
    fields.update(kwargs)
    return RollingConfig(**fields)


def test_standardise_window():
    z, mean, std = standardise_window(np.array([1.0, 2.0, 3.0]))
    assert_allclose(z, [-1.0, 0.0, 1.0])
    assert mean == 2.0 and std == 1.0


def test_standardise_constant_series_names_it():
    with pytest.raises(InputError, match="log_rv node=a"):
        standardise_window(np.full(5, 3.0), "log_rv node=a")


def test_destandardise_round_trip(rng):
    x = rng.normal(3.0, 2.0, size=100)
    z, mean, std = standardise_window(x)
    assert_allclose(destandardise(z, mean, std), x, atol=1e-12)


def test_jensen_examples():
    assert jensen_backtransform(0.0, 2.0) == pytest.approx(math.e, abs=1e-6)
    assert jensen_backtransform(math.log(4.0), 0.0) == pytest.approx(4.0)
    assert jensen_backtransform(1.0, 0.5) == pytest.approx(3.490343, abs=1e-6)
    with pytest.raises(InputError):
        jensen_backtransform(0.0, -0.1)


def test_jensen_correction_removes_bias():
    rng = np.random.default_rng(0)
    sigma2 = 0.25
    y_hat = rng.normal(0.0, 0.5, size=100_000)
    realised = np.exp(y_hat + rng.normal(0.0, math.sqrt(sigma2), size=y_hat.size))
    corrected = jensen_backtransform(y_hat, sigma2)
    assert 0.99 <= corrected.mean() / realised.mean() <= 1.01
    assert np.exp(y_hat).mean() / realised.mean() == pytest.approx(math.exp(-sigma2 / 2), abs=0.01)


def test_refit_schedule_covers_out_of_sample_dates():
    for n_dates, initial, block in [(1009, 1008, 22), (2300, 1008, 22), (300, 200, 7), (250, 200, 50)]:
        origins = refit_origins(n_dates, initial, block)
        assert len(origins) == math.ceil((n_dates - initial) / block)
        covered = [t for o in origins for t in range(o, min(o + block, n_dates))]
        assert covered == list(range(initial, n_dates))


def test_rolling_config_validation():
    with pytest.raises(ValueError):
        RollingConfig(initial_window=100, refit_window=200)
    with pytest.raises(ValueError):
        RollingConfig(initial_window=100, refit_window=20)
    cfg = RollingConfig()
    assert (cfg.initial_window, cfg.refit_window, cfg.block) == (1008, 756, 22)


def test_backtest_shapes_and_positivity(small_sim):
    result = run_backtest(small_sim.log_rv, small_sim.exog, small_sim.returns, GLOBAL_IV, _rolling())
    n_out = small_sim.log_rv.n_dates - 200
    assert result.forecasts.values.shape == (n_out, 5)
    assert result.forecasts.dates == small_sim.log_rv.dates[200:]
    assert np.all(result.forecasts.values > 0)
    assert len(result.refits) == math.ceil(n_out / 22)
    assert result.refits[0].refit_date == small_sim.log_rv.dates[200]
    assert result.refits[0].train_start == small_sim.log_rv.dates[50]
    assert result.refits[0].train_end == small_sim.log_rv.dates[199]
    assert result.family == "GNAR-HARX"
    assert_allclose(result.actuals.values, np.exp(small_sim.log_rv.values[200:]))


def test_single_forecast_date(small_sim):
    y = small_sim.log_rv.rows(0, 201)
    exog = {"iv": small_sim.exog["iv"].rows(0, 201)}
    result = run_backtest(y, exog, None, GLOBAL_IV, _rolling())
    assert result.forecasts.dates == (y.dates[200],)
    assert len(result.refits) == 1


def test_needs_more_dates_than_initial_window(small_sim):
    y = small_sim.log_rv.rows(0, 200)
    with pytest.raises(InputError):
        run_backtest(y, {"iv": small_sim.exog["iv"].rows(0, 200)}, None, GLOBAL_IV, _rolling())


def test_constant_window_is_an_estimation_error_naming_refit_date(small_sim):
    values = small_sim.log_rv.values.copy()
    values[220:, 0] = 1.0
    y = small_sim.log_rv.with_values(values)
    with pytest.raises(EstimationError, match=f"refit_date={y.dates[376]}.*log_rv node={y.node_ids[0]}"):
        run_backtest(y, small_sim.exog, None, GLOBAL_IV, _rolling())


def test_contemporaneous_exog_lag_warns(small_sim):
    spec = ModelSpec(variant=Variant.GLOBAL, stages=(1, 1, 1), exog=(ExogSpec(name="iv", lags=(0, 1)),))
    with pytest.warns(LookAheadWarning, match="iv"):
        result = run_backtest(small_sim.log_rv, small_sim.exog, None, spec, _rolling())
    assert result.forecasts.n_dates == small_sim.log_rv.n_dates - 200

    with warnings.catch_warnings():
        warnings.simplefilter("error", LookAheadWarning)
        run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, _rolling())


def test_zero_noise_forecasts_are_exact():
    sim = simulate(global_sim_spec(n_nodes=4, length=300, noise_std=0.0, seed=11))
    result = run_backtest(sim.log_rv, sim.exog, None, GLOBAL_IV, _rolling(standardise=False))
    assert_allclose(result.log_forecasts.values, sim.log_rv.values[200:], atol=1e-8)


def test_standardised_forecast_matches_manual_refit(small_sim):
    cfg = _rolling(block=300)
    result = run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, cfg)

    y = small_sim.log_rv.values
    iv = small_sim.exog["iv"].values
    ym, ys = y[50:200].mean(axis=0), y[50:200].std(axis=0, ddof=1)
    xm, xs = iv[50:200].mean(axis=0), iv[50:200].std(axis=0, ddof=1)
    y_z = small_sim.log_rv.with_values((y - ym) / ys)
    iv_z = small_sim.exog["iv"].with_values((iv - xm) / xs)
    net = result.refits[0].network
    train = build_design(y_z, {"iv": iv_z}, net, GLOBAL_IV, rows=range(50, 200))
    model = fit_ols(train, net)
    assert_allclose(list(model.coefficients.values()), list(result.refits[0].coefficients.values()), rtol=1e-10)

    test = build_design(y_z, {"iv": iv_z}, net, GLOBAL_IV, rows=range(200, y.shape[0]))
    z_hat = fitted_values(test, model).reshape(-1, 5)
    log_hat = z_hat * ys + ym
    assert_allclose(result.log_forecasts.values, log_hat, rtol=1e-10)
    sigma2 = ys**2 * np.asarray(model.resid_var)
    assert_allclose(result.forecasts.values, np.exp(log_hat + sigma2 / 2), rtol=1e-10)
    assert_allclose(result.refits[0].resid_var_log, sigma2, rtol=1e-10)


@pytest.mark.parametrize("cut", [210, 260, 330])
def test_no_look_ahead(small_sim, cut):
    base = run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, _rolling())

    def perturb(panel: TimeSeriesPanel) -> TimeSeriesPanel:
        values = panel.values.copy()
        values[cut + 1 :] += 5.0 * np.random.default_rng(cut).standard_normal(values[cut + 1 :].shape)
        return panel.with_values(values)

    shocked = run_backtest(
        perturb(small_sim.log_rv), {"iv": perturb(small_sim.exog["iv"])}, None, GLOBAL_IV, _rolling()
    )
    upto = cut - 200 + 1
    assert np.array_equal(base.forecasts.values[:upto], shocked.forecasts.values[:upto])
    assert np.array_equal(base.log_forecasts.values[:upto], shocked.log_forecasts.values[:upto])


def test_block_length_does_not_change_origin_forecast(small_sim):
    daily = run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, _rolling(block=1))
    monthly = run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, _rolling(block=22))
    for k in range(0, daily.forecasts.n_dates, 22):
        assert_allclose(monthly.forecasts.values[k], daily.forecasts.values[k], rtol=1e-12)


def test_threads_do_not_change_results(small_sim):
    one = run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, _rolling(), threads=1)
    four = run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, _rolling(), threads=4)
    assert np.array_equal(one.forecasts.values, four.forecasts.values)
    assert [r.coefficients for r in one.refits] == [r.coefficients for r in four.refits]


def test_empty_network_local_matches_per_node_harx(small_sim):
    spec = ModelSpec(variant=Variant.LOCAL, stages=(1, 1, 1), exog=(ExogSpec(name="iv", lags=(1,)),))
    harx = ModelSpec(variant=Variant.LOCAL, stages=(0, 0, 0), exog=(ExogSpec(name="iv", lags=(1,)),))
    cfg = _rolling(network_mode=NetworkMode.EMPTY)
    with warnings.catch_warnings():
        warnings.simplefilter("error", RankDeficiencyWarning)
        gnar = run_backtest(small_sim.log_rv, small_sim.exog, None, spec, cfg)
    assert gnar.family == "HARX"
    assert not any(r.rank_deficient for r in gnar.refits)

    for i, node in enumerate(small_sim.log_rv.node_ids):
        single = small_sim.log_rv.reorder((node,))
        iv = small_sim.exog["iv"].reorder((node,))
        alone = run_backtest(single, {"iv": iv}, None, harx, cfg)
        assert_allclose(gnar.log_forecasts.values[:, i], alone.log_forecasts.values[:, 0], rtol=1e-10, atol=1e-10)
        assert_allclose(gnar.forecasts.values[:, i], alone.forecasts.values[:, 0], rtol=1e-10, atol=1e-10)


def test_graphical_lasso_mode_records_networks(small_sim):
    cfg = _rolling(network_mode=NetworkMode.GRAPHICAL_LASSO, cv_folds=5)
    result = run_backtest(small_sim.log_rv, small_sim.exog, small_sim.returns, GLOBAL_IV, cfg)
    rhos = {r.rho for r in result.refits}
    assert len(rhos) == 1 and next(iter(rhos)) > 0
    assert all(r.network.nodes == small_sim.log_rv.node_ids for r in result.refits)
    assert all(r.glasso_converged is not None for r in result.refits)


def test_graphical_lasso_mode_needs_returns(small_sim):
    cfg = _rolling(network_mode=NetworkMode.GRAPHICAL_LASSO, glasso_rho=0.1)
    with pytest.raises(InputError, match="returns"):
        run_backtest(small_sim.log_rv, small_sim.exog, None, GLOBAL_IV, cfg)


def test_misaligned_exog_rejected(small_sim):
    other = make_panel(small_sim.exog["iv"].values, node_ids=list(small_sim.log_rv.node_ids), start="1990-01-01")
    with pytest.raises(InputError, match="not aligned"):
        run_backtest(small_sim.log_rv, {"iv": other}, None, GLOBAL_IV, _rolling())
