"""Data models for the GNAR-HARX toolkit."""

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from config import config
from core.errors import InputError


HAR_TERMS = ("alpha_d", "alpha_w", "alpha_m")


# --- Panels ---


@dataclass(frozen=True)
class TimeSeriesPanel:
    """Date-aligned T x N matrix of one daily series.

    Dates are ISO-8601 labels in strictly increasing order; rows are trading
    days and lags are positional.
    """
    node_ids: Tuple[str, ...]
    dates: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        node_ids = tuple(str(n) for n in self.node_ids)
        dates = tuple(str(d) for d in self.dates)
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1 and len(node_ids) == 1:
            values = values.reshape(-1, 1)
        if values.shape != (len(dates), len(node_ids)):
            raise InputError(
                f"Panel shape {values.shape} does not match {len(dates)} dates x {len(node_ids)} nodes"
            )
        if len(set(node_ids)) != len(node_ids):
            raise InputError(f"Duplicate node ids: {list(node_ids)}")
        for prev, curr in zip(dates, dates[1:]):
            if not curr > prev:
                raise InputError(f"Dates must be strictly increasing: {prev} then {curr}")
        if not np.all(np.isfinite(values)):
            row, col = np.argwhere(~np.isfinite(values))[0]
            raise InputError(f"Missing or non-finite value for node={node_ids[col]} date={dates[row]}")
        values.flags.writeable = False
        object.__setattr__(self, "node_ids", node_ids)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    def node_index(self, node: str) -> int:
        try:
            return self.node_ids.index(node)
        except ValueError:
            raise InputError(f"Unknown node: {node}") from None

    def column(self, node: str) -> np.ndarray:
        return self.values[:, self.node_index(node)]

    def rows(self, start: int, stop: int) -> "TimeSeriesPanel":
        """Positional row slice [start, stop)."""
        return TimeSeriesPanel(self.node_ids, self.dates[start:stop], self.values[start:stop])

    def with_values(self, values: np.ndarray) -> "TimeSeriesPanel":
        return TimeSeriesPanel(self.node_ids, self.dates, values)

    def reorder(self, node_ids: Tuple[str, ...]) -> "TimeSeriesPanel":
        idx = [self.node_index(n) for n in node_ids]
        return TimeSeriesPanel(tuple(node_ids), self.dates, self.values[:, idx])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, index=list(self.dates), columns=list(self.node_ids))
        frame.index.name = "date"
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TimeSeriesPanel":
        return cls(
            node_ids=tuple(str(c) for c in frame.columns),
            dates=tuple(str(d) for d in frame.index),
            values=frame.to_numpy(dtype=float),
        )


class IntradayDay(BaseModel):
    """Intraday log prices for one node on one day."""
    model_config = ConfigDict(frozen=True)

    log_prices: Tuple[float, ...]
    base_spacing: int = Field(1, ge=1, description="Finest-grid observations per coarse interval")


# --- Networks ---


class Network(BaseModel):
    """Undirected simple graph; edges are index pairs (i, j) with i < j."""
    model_config = ConfigDict(frozen=True)

    nodes: Tuple[str, ...]
    edges: Tuple[Tuple[int, int], ...] = ()

    @field_validator("nodes")
    @classmethod
    def _check_nodes(cls, nodes: Tuple[str, ...]) -> Tuple[str, ...]:
        if not nodes:
            raise ValueError("network needs at least one node")
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"duplicate node labels: {list(nodes)}")
        return nodes

    @field_validator("edges")
    @classmethod
    def _normalise_edges(cls, edges: Tuple[Tuple[int, int], ...], info: ValidationInfo) -> Tuple[Tuple[int, int], ...]:
        n = len(info.data.get("nodes", ()))
        normalised = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
            normalised.add((min(i, j), max(i, j)))
        return tuple(sorted(normalised))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n_nodes, self.n_nodes))
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = 1.0
        return adj

    def to_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_nodes))
        graph.add_edges_from(self.edges)
        return graph


@dataclass(frozen=True)
class NeighborStages:
    """Per-node r-stage neighbour sets with uniform weights.

    members[i][r - 1] holds the sorted indices at shortest-path distance r.
    """
    n_nodes: int
    r_max: int
    members: Tuple[Tuple[Tuple[int, ...], ...], ...]

    def weights(self, i: int, r: int) -> Dict[int, float]:
        stage = self.members[i][r - 1]
        if not stage:
            return {}
        return {j: 1.0 / len(stage) for j in stage}

    def weight_matrix(self, r: int) -> np.ndarray:
        """Row i holds w^(r)_{i, .}; rows of empty stages are zero."""
        w = np.zeros((self.n_nodes, self.n_nodes))
        if r < 1 or r > self.r_max:
            return w
        for i in range(self.n_nodes):
            stage = self.members[i][r - 1]
            if stage:
                w[i, list(stage)] = 1.0 / len(stage)
        return w


# --- Model specification ---


class Variant(str, Enum):
    """Degree of parameter sharing across nodes."""
    GLOBAL = "global"      # everything shared
    STANDARD = "standard"  # per-node alpha, shared beta/lambda
    LOCAL = "local"        # everything per node


class NetworkMode(str, Enum):
    FULLY_CONNECTED = "fully_connected"
    GRAPHICAL_LASSO = "graphical_lasso"
    EMPTY = "empty"


class ExogSpec(BaseModel):
    """One exogenous variable and the lags it enters with."""
    model_config = ConfigDict(frozen=True)

    name: str
    lags: Tuple[int, ...] = (1,)

    @field_validator("lags")
    @classmethod
    def _check_lags(cls, lags: Tuple[int, ...]) -> Tuple[int, ...]:
        if not lags:
            raise ValueError("lag list must be nonempty")
        if any(lag < 0 for lag in lags):
            raise ValueError(f"lags must be nonnegative: {lags}")
        if len(set(lags)) != len(lags):
            raise ValueError(f"duplicate lags: {lags}")
        return tuple(sorted(lags))


class ModelSpec(BaseModel):
    """GNAR-HARX specification: variant, neighbourhood stages and exogenous lags."""
    model_config = ConfigDict(frozen=True)

    variant: Variant = Variant.GLOBAL
    stages: Tuple[int, int, int] = (1, 1, 1)
    exog: Tuple[ExogSpec, ...] = ()

    @field_validator("stages")
    @classmethod
    def _check_stages(cls, stages: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if any(r < 0 for r in stages):
            raise ValueError(f"stages must be nonnegative: {stages}")
        return stages

    @field_validator("exog")
    @classmethod
    def _check_exog(cls, exog: Tuple[ExogSpec, ...]) -> Tuple[ExogSpec, ...]:
        names = [e.name for e in exog]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate exogenous names: {names}")
        return exog

    @property
    def exog_names(self) -> List[str]:
        return [e.name for e in self.exog]

    @property
    def max_exog_lag(self) -> int:
        return max((max(e.lags) for e in self.exog), default=0)

    @property
    def first_row(self) -> int:
        """First row index with complete lag history."""
        return max(config.har_max_lag, self.max_exog_lag)

    @property
    def network_terms(self) -> List[str]:
        r_d, r_w, r_m = self.stages
        return (
            [f"beta_d_{r}" for r in range(1, r_d + 1)]
            + [f"beta_w_{r}" for r in range(1, r_w + 1)]
            + [f"beta_m_{r}" for r in range(1, r_m + 1)]
        )

    @property
    def exog_terms(self) -> List[str]:
        return [f"lambda_{e.name}_{lag}" for e in self.exog for lag in e.lags]

    @property
    def terms(self) -> List[str]:
        """Per-node regressor names in canonical order."""
        return list(HAR_TERMS) + self.network_terms + self.exog_terms

    def coefficient_keys(self, node_ids: List[str]) -> List[str]:
        """Coefficient keys in design-column order for this variant."""
        if self.variant == Variant.GLOBAL:
            return self.terms
        if self.variant == Variant.STANDARD:
            own = [f"{t}:{n}" for n in node_ids for t in HAR_TERMS]
            return own + self.network_terms + self.exog_terms
        return [f"{t}:{n}" for n in node_ids for t in self.terms]


class SeriesStats(BaseModel):
    """Per-node window mean and standard deviation of one series."""
    mean: List[float]
    std: List[float]


class FittedModel(BaseModel):
    """Estimated GNAR-HARX coefficients and residual variances."""
    spec: ModelSpec
    node_ids: List[str]
    coefficients: Dict[str, float]
    resid_var: List[float]
    standardisation: Dict[str, SeriesStats] = Field(default_factory=dict)
    network: Network
    train_range: Optional[Tuple[str, str]] = None
    rank_deficient: bool = False

    @model_validator(mode="after")
    def _check_keys(self) -> "FittedModel":
        expected = self.spec.coefficient_keys(self.node_ids)
        if list(self.coefficients) != expected:
            raise ValueError("coefficient keys do not match the specification")
        if any(v < 0 for v in self.resid_var):
            raise ValueError("residual variances must be nonnegative")
        return self


class StationarityResult(BaseModel):
    node: str
    margin: float
    stationary: bool


@dataclass(frozen=True)
class GlassoFit:
    """Graphical lasso estimate."""
    precision: np.ndarray
    covariance: np.ndarray
    rho: float
    iterations: int
    converged: bool
    objective_trace: Tuple[float, ...] = ()


# --- Backtesting ---


class RollingConfig(BaseModel):
    """Rolling-window refit schedule and network construction."""
    model_config = ConfigDict(frozen=True)

    initial_window: int = Field(default_factory=lambda: config.initial_window, ge=1)
    refit_window: int = Field(default_factory=lambda: config.refit_window, ge=1)
    block: int = Field(default_factory=lambda: config.block, ge=1)
    network_mode: NetworkMode = NetworkMode.FULLY_CONNECTED
    glasso_rho: Optional[float] = Field(None, ge=0)
    standardise: bool = True
    cv_folds: int = Field(default_factory=lambda: config.cv_folds, ge=2)
    glasso_tol: float = Field(default_factory=lambda: config.glasso_tol, gt=0)
    glasso_max_iter: int = Field(default_factory=lambda: config.glasso_max_iter, ge=1)
    zero_tol: float = Field(default_factory=lambda: config.zero_tol, ge=0)

    @model_validator(mode="after")
    def _check_windows(self) -> "RollingConfig":
        if self.refit_window > self.initial_window:
            raise ValueError(
                f"refit_window ({self.refit_window}) must not exceed initial_window ({self.initial_window})"
            )
        if self.refit_window <= config.har_max_lag:
            raise ValueError(f"refit_window must exceed {config.har_max_lag} trading days")
        return self


class RefitRecord(BaseModel):
    """State of one refit in a rolling backtest."""
    refit_date: str
    train_start: str
    train_end: str
    coefficients: Dict[str, float]
    network: Network
    resid_var_std: List[float]
    resid_var_log: List[float]
    rho: Optional[float] = None
    glasso_converged: Optional[bool] = None
    rank_deficient: bool = False


@dataclass
class BacktestResult:
    """Out-of-sample forecasts and refit-by-refit model state."""
    spec: ModelSpec
    network_mode: NetworkMode
    forecasts: TimeSeriesPanel
    actuals: TimeSeriesPanel
    log_forecasts: TimeSeriesPanel
    refits: List[RefitRecord] = field(default_factory=list)

    @property
    def family(self) -> str:
        base = "HAR" if self.network_mode == NetworkMode.EMPTY else "GNAR-HAR"
        return base + ("X" if self.spec.exog else "")

    @property
    def coefficient_trajectory(self) -> List[Tuple[str, Dict[str, float]]]:
        return [(r.refit_date, r.coefficients) for r in self.refits]

    @property
    def network_trajectory(self) -> List[Tuple[str, Network]]:
        return [(r.refit_date, r.network) for r in self.refits]

    @property
    def residual_var_trajectory(self) -> List[Tuple[str, List[float]]]:
        return [(r.refit_date, r.resid_var_log) for r in self.refits]


# --- Evaluation ---


class NodeLoss(BaseModel):
    qlike: float
    mse: float


class LossSummary(BaseModel):
    """Loss summary for one model in a comparison."""
    label: str
    model: str = ""
    variant: str = ""
    network: str = ""
    exogenous: List[str] = Field(default_factory=list)
    qlike: float
    mse: float
    rel_qlike: float = 1.0
    rel_mse: float = 1.0
    n_params: int
    per_node: Dict[str, NodeLoss] = Field(default_factory=dict)


# --- Simulation ---


class ExogGenerator(BaseModel):
    """Stationary AR(1) driver for one exogenous variable."""
    phi: float = Field(0.5, gt=-1, lt=1)
    noise_std: float = Field(1.0, ge=0)


class SimSpec(BaseModel):
    """Synthetic GNAR-HARX process with known parameters."""
    spec: ModelSpec
    n_nodes: int = Field(..., ge=1)
    length: int = Field(..., ge=1)
    burn_in: int = Field(default_factory=lambda: config.burn_in, ge=0)
    node_ids: Optional[List[str]] = None
    network: Optional[Network] = None
    coefficients: Dict[str, float]
    noise_std: List[float] | float = 1.0
    exog: Dict[str, ExogGenerator] = Field(default_factory=dict)
    return_coupling: float = Field(0.0, gt=-1, lt=1)
    seed: int = 0
    start_date: str = Field(default_factory=lambda: config.sim_start_date)

    @model_validator(mode="after")
    def _check_consistency(self) -> "SimSpec":
        ids = self.resolved_node_ids()
        if len(ids) != self.n_nodes:
            raise ValueError(f"{len(ids)} node ids given for {self.n_nodes} nodes")
        if self.network is not None and list(self.network.nodes) != ids:
            raise ValueError("network nodes must match node_ids")
        noise = self.noise_vector()
        if len(noise) != self.n_nodes:
            raise ValueError(f"noise_std needs {self.n_nodes} entries")
        if np.any(noise < 0):
            raise ValueError("noise_std must be nonnegative")
        missing = set(self.spec.exog_names) - set(self.exog)
        if missing:
            raise ValueError(f"no generator for exogenous variables: {sorted(missing)}")
        return self

    def resolved_node_ids(self) -> List[str]:
        return list(self.node_ids) if self.node_ids else [f"node{i}" for i in range(self.n_nodes)]

    def noise_vector(self) -> np.ndarray:
        if isinstance(self.noise_std, (int, float)):
            return np.full(self.n_nodes, float(self.noise_std))
        return np.asarray(self.noise_std, dtype=float)


# --- Run configuration ---


class InputPaths(BaseModel):
    """Raw or ingested input locations for a run."""
    rv: Optional[str] = None
    log_rv: Optional[str] = None
    returns: Optional[str] = None
    opens: Optional[str] = None
    closes: Optional[str] = None
    iv: Optional[str] = None
    intraday: Optional[str] = None
    intraday_base_spacing: int = Field(1, ge=1)
    panel_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_exists(self) -> "InputPaths":
        for name in ("rv", "log_rv", "returns", "opens", "closes", "iv", "intraday", "panel_dir"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                raise ValueError(f"input '{name}' not found: {path}")
        return self


class ModelEntry(BaseModel):
    """One model to backtest."""
    label: str
    spec: ModelSpec = Field(default_factory=ModelSpec)
    network: NetworkMode = NetworkMode.FULLY_CONNECTED


class RunConfig(BaseModel):
    """Resolved configuration of one CLI run."""
    inputs: InputPaths = Field(default_factory=InputPaths)
    models: List[ModelEntry] = Field(default_factory=list)
    rolling: RollingConfig = Field(default_factory=RollingConfig)
    simulation: Optional[SimSpec] = None
    exogenous: List[str] = Field(default_factory=lambda: ["iv", "good", "bad", "on"])
    output_dir: str = Field(default_factory=lambda: config.output_dir)
    seed: int = Field(default_factory=lambda: config.seed)
    threads: int = Field(default_factory=lambda: config.threads, ge=1)

    @field_validator("models")
    @classmethod
    def _unique_labels(cls, models: List[ModelEntry]) -> List[ModelEntry]:
        labels = [m.label for m in models]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate model labels: {labels}")
        return models
