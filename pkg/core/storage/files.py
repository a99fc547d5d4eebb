"""Directory-backed artefact storage: CSV panels and JSON documents."""

import json
import logging
import os
import tempfile
from typing import Any, Optional

import pandas as pd

from config import config
from core.errors import InputError
from core.models import Network, TimeSeriesPanel


logger = logging.getLogger(__name__)


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def frame_to_csv(frame: pd.DataFrame, index: bool = True) -> str:
    return frame.to_csv(index=index, float_format=config.float_format, lineterminator="\n")


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --- Panels ---


def read_panel_csv(path: str) -> TimeSeriesPanel:
    """
    Read a wide panel CSV with header ``date,<node1>,<node2>,...``.

    Dates missing a value for any node are dropped.
    """
    try:
        frame = pd.read_csv(path, dtype={"date": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputError(f"Cannot read panel {path}: {e}") from None
    if "date" not in frame.columns:
        raise InputError(f"Panel {path} has no 'date' column")
    frame = frame.set_index("date")
    if frame.shape[1] == 0:
        raise InputError(f"Panel {path} has no node columns")
    if frame.index.duplicated().any():
        raise InputError(f"Panel {path} has duplicate dates: {sorted(set(frame.index[frame.index.duplicated()]))[:3]}")
    try:
        frame = frame.apply(pd.to_numeric)
    except (ValueError, TypeError) as e:
        raise InputError(f"Panel {path} has non-numeric values: {e}") from None

    complete = frame.dropna(axis=0, how="any").sort_index()
    dropped = len(frame) - len(complete)
    if dropped:
        logger.info("read_panel: path=%s dropped_incomplete_dates=%d", path, dropped)
    if complete.empty:
        raise InputError(f"Panel {path} has no complete dates")
    return TimeSeriesPanel.from_frame(complete)


def write_panel_csv(panel: TimeSeriesPanel, path: str) -> None:
    atomic_write_text(path, frame_to_csv(panel.to_frame()))


def read_intraday(path: str) -> pd.DataFrame:
    """Long-format intraday prices: columns date, node, log_price, rows in time order."""
    try:
        frame = pd.read_csv(path, dtype={"date": str, "node": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputError(f"Cannot read intraday data {path}: {e}") from None
    missing = {"date", "node", "log_price"} - set(frame.columns)
    if missing:
        raise InputError(f"Intraday data {path} missing columns: {sorted(missing)}")
    return frame


# --- Networks ---


def network_to_json(net: Network) -> str:
    return dump_json({"nodes": list(net.nodes), "edges": [list(e) for e in net.edges]})


def read_network_json(path: str) -> Network:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return Network(nodes=tuple(data["nodes"]), edges=tuple(tuple(e) for e in data.get("edges", [])))
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"Cannot read network {path}: {e}") from None


# --- Store ---


class FileStore:
    """Artefact directory with atomic writes."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def path(self, *parts: str) -> str:
        return os.path.join(self.root, *parts)

    def exists(self, *parts: str) -> bool:
        return os.path.exists(self.path(*parts))

    def write_text(self, relpath: str, text: str) -> str:
        path = self.path(relpath)
        atomic_write_text(path, text)
        return path

    def write_csv(self, relpath: str, frame: pd.DataFrame, index: bool = False) -> str:
        return self.write_text(relpath, frame_to_csv(frame, index=index))

    def write_json(self, relpath: str, obj: Any) -> str:
        return self.write_text(relpath, dump_json(obj))

    def read_json(self, relpath: str) -> Any:
        path = self.path(relpath)
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, ValueError) as e:
            raise InputError(f"Cannot read {path}: {e}") from None

    def read_csv(self, relpath: str, dtype: Optional[dict] = None) -> pd.DataFrame:
        path = self.path(relpath)
        try:
            return pd.read_csv(path, dtype=dtype)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise InputError(f"Cannot read {path}: {e}") from None

    def subdir(self, name: str) -> "FileStore":
        return FileStore(self.path(name))
