import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.models import ExogGenerator, ExogSpec, ModelSpec, SimSpec, TimeSeriesPanel, Variant  # noqa: E402

REPO_ROOT = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(REPO_ROOT, "data")

GLOBAL_COEFFICIENTS = {
    "alpha_d": 0.2,
    "alpha_w": 0.3,
    "alpha_m": 0.2,
    "beta_d_1": 0.1,
    "beta_w_1": -0.05,
    "beta_m_1": -0.05,
    "lambda_iv_1": 0.1,
}


def make_panel(values, node_ids=None, start="2000-01-03") -> TimeSeriesPanel:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    node_ids = node_ids or [f"n{i}" for i in range(values.shape[1])]
    dates = pd.bdate_range(start, periods=values.shape[0]).strftime("%Y-%m-%d")
    return TimeSeriesPanel(tuple(node_ids), tuple(dates), values)


def global_sim_spec(n_nodes=10, length=1000, seed=0, noise_std=0.5, burn_in=500, **overrides) -> SimSpec:
    spec = ModelSpec(variant=Variant.GLOBAL, stages=(1, 1, 1), exog=(ExogSpec(name="iv", lags=(1,)),))
    fields = dict(
        spec=spec,
        n_nodes=n_nodes,
        length=length,
        burn_in=burn_in,
        coefficients=dict(GLOBAL_COEFFICIENTS),
        noise_std=noise_std,
        exog={"iv": ExogGenerator(phi=0.9, noise_std=0.5)},
        return_coupling=0.3,
        seed=seed,
    )
    fields.update(overrides)
    return SimSpec(**fields)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_sim():
    """Five-node simulated dataset long enough for short rolling backtests."""
    from analysis.simulation import simulate

    return simulate(global_sim_spec(n_nodes=5, length=420, seed=7))


GOLDEN_DIR = os.path.join(REPO_ROOT, "tests", "golden")


def pytest_addoption(parser):
    parser.addoption(
        "--update-golden",
        action="store_true",
        default=False,
        help="Rewrite tests/golden from the current outputs instead of comparing against it.",
    )


@pytest.fixture
def update_golden(request):
    return request.config.getoption("--update-golden")
