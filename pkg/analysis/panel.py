"""Construction of realised-variance and exogenous panels from raw inputs."""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from core.errors import InputError
from core.models import IntradayDay, TimeSeriesPanel


logger = logging.getLogger(__name__)


def compute_rv_ss(day: IntradayDay) -> float:
    """
    Subsampled realised variance over staggered grids.

    Grid l (0-based) starts at offset l and strides by base_spacing; its last,
    possibly partial, return runs to the final price. The estimate is the
    average of the per-grid sums of squared returns.
    """
    prices = np.asarray(day.log_prices, dtype=float)
    spacing = day.base_spacing
    last = prices.size - 1
    if last < spacing:
        raise InputError(
            f"insufficient intraday data: {prices.size} prices for base_spacing={spacing}"
        )

    total = 0.0
    for offset in range(spacing):
        idx = np.arange(offset, prices.size, spacing)
        if idx[-1] != last:
            idx = np.append(idx, last)
        total += float(np.sum(np.diff(prices[idx]) ** 2))
    return total / spacing


def rv_panel_from_intraday(frame: pd.DataFrame, base_spacing: int) -> TimeSeriesPanel:
    """RV panel from long-format intraday rows (date, node, log_price) in time order."""
    missing = {"date", "node", "log_price"} - set(frame.columns)
    if missing:
        raise InputError(f"Intraday data missing columns: {sorted(missing)}")

    rv = {}
    for (date, node), group in frame.groupby(["date", "node"], sort=True):
        day = IntradayDay(log_prices=tuple(group["log_price"].astype(float)), base_spacing=base_spacing)
        try:
            rv[(str(date), str(node))] = compute_rv_ss(day)
        except InputError as e:
            raise InputError(f"node={node} date={date}: {e}") from None

    wide = pd.Series(rv).unstack()
    wide = wide.dropna(axis=0, how="any").sort_index()
    return TimeSeriesPanel.from_frame(wide)


def log_transform(rv_panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Elementwise natural log of a strictly positive panel."""
    bad = np.argwhere(rv_panel.values <= 0)
    if bad.size:
        row, col = bad[0]
        raise InputError(
            f"Nonpositive realised variance {rv_panel.values[row, col]} "
            f"at node={rv_panel.node_ids[col]} date={rv_panel.dates[row]}"
        )
    return rv_panel.with_values(np.log(rv_panel.values))


def split_returns(returns: TimeSeriesPanel) -> Tuple[TimeSeriesPanel, TimeSeriesPanel]:
    """Decompose returns into positive (good) and negative (bad) parts."""
    r = returns.values
    good = np.where(r > 0, r, 0.0)
    bad = np.where(r < 0, r, 0.0)
    return returns.with_values(good), returns.with_values(bad)


def overnight_returns(opens: TimeSeriesPanel, closes: TimeSeriesPanel) -> TimeSeriesPanel:
    """Open_t / Close_{t-1} - 1; the first date has no previous close and is dropped."""
    if opens.dates != closes.dates or set(opens.node_ids) != set(closes.node_ids):
        raise InputError("opens and closes must share dates and nodes")
    closes = closes.reorder(opens.node_ids)
    prev_close = closes.values[:-1]
    zero = np.argwhere(prev_close == 0)
    if zero.size:
        row, col = zero[0]
        raise InputError(f"Zero previous close at node={opens.node_ids[col]} date={opens.dates[row]}")
    values = opens.values[1:] / prev_close - 1.0
    return TimeSeriesPanel(opens.node_ids, opens.dates[1:], values)


@dataclass(frozen=True)
class AlignedPanels:
    """Panels restricted to their common dates, with per-panel drop counts."""
    panels: Dict[str, TimeSeriesPanel]
    dropped: Dict[str, int]

    @property
    def dates(self) -> Tuple[str, ...]:
        return next(iter(self.panels.values())).dates


def align(panels: Dict[str, TimeSeriesPanel]) -> AlignedPanels:
    """
    Restrict every panel to the intersection of dates.

    Columns follow the node order of the first panel; every panel must carry
    the same node set.
    """
    if not panels:
        raise InputError("Nothing to align")

    names = list(panels)
    canonical = panels[names[0]].node_ids
    for name in names[1:]:
        if set(panels[name].node_ids) != set(canonical):
            raise InputError(
                f"Panel '{name}' nodes {sorted(panels[name].node_ids)} differ from {sorted(canonical)}"
            )

    common = set(panels[names[0]].dates)
    for name in names[1:]:
        common &= set(panels[name].dates)
    if not common:
        raise InputError(f"Panels {names} share no dates")

    aligned, dropped = {}, {}
    for name in names:
        panel = panels[name]
        keep = [k for k, d in enumerate(panel.dates) if d in common]
        dropped[name] = panel.n_dates - len(keep)
        sub = TimeSeriesPanel(panel.node_ids, tuple(panel.dates[k] for k in keep), panel.values[keep])
        aligned[name] = sub.reorder(canonical)
        if dropped[name]:
            logger.info("align: panel=%s dropped_dates=%d", name, dropped[name])

    return AlignedPanels(panels=aligned, dropped=dropped)
