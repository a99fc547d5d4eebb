"""Configuration for the GNAR-HARX volatility toolkit."""

import os
import re
from dataclasses import dataclass, field


@dataclass
class Config:
    """Configuration settings."""
    output_dir: str = field(default_factory=lambda: os.environ.get("GNAR_OUTPUT_DIR", "./output"))
    threads: int = field(default_factory=lambda: int(os.environ.get("GNAR_THREADS", "1")))
    seed: int = field(default_factory=lambda: int(os.environ.get("GNAR_SEED", "0")))
    log_level: str = field(default_factory=lambda: os.environ.get("GNAR_LOG_LEVEL", "INFO"))

    # Rolling window (trading days, 252 per year)
    initial_window: int = 1008  # four years
    refit_window: int = 756     # three years
    block: int = 22             # one trading month

    # HAR lag structure: daily lag 1, weekly lags 2..5, monthly lags 6..22
    har_max_lag: int = 22

    # Graphical lasso
    cv_folds: int = 10
    rho_grid_size: int = 20
    rho_grid_min_ratio: float = 0.01
    glasso_tol: float = 1e-6
    glasso_max_iter: int = 500
    lasso_tol: float = 1e-10
    lasso_max_iter: int = 1000
    zero_tol: float = 1e-8

    # Simulation
    burn_in: int = 500
    sim_start_date: str = "2001-02-02"

    # Output
    float_format: str = "%.17g"

    def get_output_path(self, label: str, base_dir: str | None = None) -> str:
        """Get output directory for a model label."""
        safe_name = re.sub(r"[^\w\-.]", "_", label.strip())
        return os.path.join(base_dir or self.output_dir, safe_name)


# Global config instance
config = Config()
