#!/usr/bin/env python3
"""
GNAR-HARX Volatility Toolkit - CLI Interface
Ingest panels, simulate synthetic data, backtest and rank forecasting models.
"""

import argparse
import json
import logging
import math
import sys
from typing import List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from config import config
from core.errors import EstimationError, InputError
from core.models import LossSummary, RunConfig
from core.services import BacktestService, IngestService, SimulationService
from core.storage import FileStore, NetworkRepository
from analysis.diagnostics import network_stats


console = Console()
logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ESTIMATION = 3


def setup_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=(level or config.log_level).upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
    )


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Read the JSON run config and apply command-line overrides before validation."""
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as e:
            raise InputError(f"Cannot read config {args.config}: {e}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"Config {args.config} is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise InputError(f"Config {args.config} must be a JSON object")

    if args.out:
        data["output_dir"] = args.out
    if args.threads is not None:
        data["threads"] = args.threads
    if args.seed is not None:
        data["seed"] = args.seed
        if isinstance(data.get("simulation"), dict):
            data["simulation"]["seed"] = args.seed
    if getattr(args, "panel_dir", None):
        data.setdefault("inputs", {})["panel_dir"] = args.panel_dir
    return RunConfig.model_validate(data)


def write_resolved(run: RunConfig) -> None:
    FileStore(run.output_dir).write_json("resolved_config.json", run.model_dump(mode="json"))


# --- Commands ---


def cmd_ingest(args: argparse.Namespace) -> int:
    run = load_run_config(args)
    service = IngestService()
    report = service.build(run.inputs, run.exogenous)
    service.save(report, run.output_dir)
    write_resolved(run)

    table = Table(title="Alignment Report")
    table.add_column("Panel", style="cyan")
    table.add_column("Nodes", justify="right")
    table.add_column("Dates kept", justify="right")
    table.add_column("Dates dropped", justify="right")
    for name, panel in report.panels.items():
        table.add_row(name, str(panel.n_nodes), str(panel.n_dates), str(report.dropped.get(name, 0)))
    console.print(table)
    if report.skipped:
        console.print(f"[yellow]Skipped (missing raw inputs): {', '.join(report.skipped)}[/yellow]")
    console.print(f"[green]Panels written to {run.output_dir}[/green]")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    run = load_run_config(args)
    if run.simulation is None:
        raise InputError("config has no 'simulation' section")
    panels = SimulationService().run(run.simulation, run.output_dir)
    write_resolved(run)
    console.print(
        f"[green]Simulated {panels.log_rv.n_nodes} nodes x {panels.log_rv.n_dates} dates "
        f"to {run.output_dir}[/green]"
    )
    return EXIT_OK


def print_ranking(summaries: List[LossSummary]) -> None:
    table = Table(title="Model Ranking (by QLIKE)")
    table.add_column("#", justify="right")
    table.add_column("Label", style="cyan")
    table.add_column("Model")
    table.add_column("Variant")
    table.add_column("Network")
    table.add_column("Exogenous")
    table.add_column("QLIKE", justify="right")
    table.add_column("Rel QLIKE", justify="right")
    table.add_column("Rel MSE", justify="right")
    table.add_column("Params", justify="right")
    for i, s in enumerate(summaries, 1):
        table.add_row(
            str(i), s.label, s.model, s.variant, s.network, ", ".join(s.exogenous) or "-",
            f"{s.qlike:.4f}", f"{s.rel_qlike:.2f}", f"{s.rel_mse:.2f}", str(s.n_params),
        )
    console.print(table)


def cmd_backtest(args: argparse.Namespace) -> int:
    run = load_run_config(args)
    if not run.models:
        raise InputError("config has no models to backtest")
    write_resolved(run)
    summaries = BacktestService().run(run)
    print_ranking(summaries)
    console.print(f"[green]Outputs written to {run.output_dir}[/green]")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    run_dir = args.run_dir or args.out or config.output_dir
    summaries = BacktestService().evaluate(run_dir)
    if not summaries:
        raise InputError(f"no saved model outputs in {run_dir}")
    print_ranking(summaries)
    return EXIT_OK


def cmd_network_stats(args: argparse.Namespace) -> int:
    frame = network_stats(NetworkRepository.load_dir(args.network_dir))
    store = FileStore(args.out or args.network_dir)
    path = store.write_csv("network_stats.csv", frame)

    table = Table(title="Network Trajectory")
    table.add_column("Refit date", style="cyan")
    table.add_column("Edges", justify="right")
    table.add_column("Jaccard vs previous", justify="right")
    for row in frame.itertuples(index=False):
        table.add_row(row.refit_date, str(row.edge_count), "" if math.isnan(row.jaccard) else f"{row.jaccard:.4f}")
    console.print(table)
    console.print(f"[green]Written {path}[/green]")
    return EXIT_OK


# --- Entry point ---


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--threads", type=int, help="worker threads for refit blocks")

    parser = argparse.ArgumentParser(prog="gnar", description="GNAR-HARX realised volatility toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", parents=[common], help="build aligned panels from raw CSVs").set_defaults(
        handler=cmd_ingest
    )
    sub.add_parser("simulate", parents=[common], help="simulate a synthetic dataset").set_defaults(
        handler=cmd_simulate
    )
    backtest = sub.add_parser("backtest", parents=[common], help="rolling-window backtest of configured models")
    backtest.add_argument("--panel-dir", dest="panel_dir", help="directory of ingested panels")
    backtest.set_defaults(handler=cmd_backtest)
    evaluate = sub.add_parser("evaluate", parents=[common], help="re-rank saved model outputs")
    evaluate.add_argument("run_dir", nargs="?", help="backtest output directory")
    evaluate.set_defaults(handler=cmd_evaluate)
    stats = sub.add_parser("network-stats", parents=[common], help="edge counts and Jaccard persistence")
    stats.add_argument("network_dir", help="directory of dated network JSON files")
    stats.set_defaults(handler=cmd_network_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging()

    try:
        return args.handler(args)
    except EstimationError as e:
        console.print(Panel(str(e), title="Estimation failure", border_style="red"))
        return EXIT_ESTIMATION
    except ValidationError as e:
        console.print(Panel(str(e), title="Invalid configuration", border_style="red"))
        return EXIT_INPUT
    except (InputError, OSError) as e:
        console.print(Panel(str(e), title="Input error", border_style="red"))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
