"""File formats: wide panel CSV, cluster map CSV, scenario config JSON.

Panel CSV is wide: a header row with a time-column label followed by one
series id per column, then one row per time point whose first cell is the
time label. Every data cell must be a finite number; missing cells and
ragged rows are rejected with the offending file line number.

The cluster map is a two-column CSV (series_id, cluster_id) with a header
row, covering every panel series exactly once with labels 1..m.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .dgp import ScenarioConfig
from .panel import Panel

__all__ = [
    "PanelFormatError",
    "load_panel_csv",
    "save_panel_csv",
    "load_cluster_map",
    "save_cluster_map",
    "load_scenario_config",
    "save_scenario_config",
]


class PanelFormatError(ValueError):
    """Raised for malformed panel, cluster-map, or scenario files."""


def load_cluster_map(path: str | Path) -> dict[str, int]:
    """Read a (series_id, cluster_id) CSV into a dict."""
    mapping: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1:
                if len(row) < 2:
                    raise PanelFormatError(
                        f"{path}: cluster map needs a two-column header"
                    )
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise PanelFormatError(
                    f"{path}: line {line_no}: expected 2 columns, got {len(row)}"
                )
            sid = row[0].strip()
            if sid in mapping:
                raise PanelFormatError(
                    f"{path}: line {line_no}: duplicate series id {sid!r}"
                )
            try:
                mapping[sid] = int(row[1])
            except ValueError:
                raise PanelFormatError(
                    f"{path}: line {line_no}: cluster id {row[1]!r} is not an integer"
                ) from None
    if not mapping:
        raise PanelFormatError(f"{path}: cluster map has no entries")
    return mapping


def load_panel_csv(
    path: str | Path, cluster_map: str | Path | dict[str, int] | None = None
) -> Panel:
    """Read a wide panel CSV, optionally attaching cluster labels.

    Parameters
    ----------
    path:
        Panel CSV file.
    cluster_map:
        Path to a cluster-map CSV, an in-memory mapping, or None for a
        single cluster.

    Raises
    ------
    PanelFormatError
        On ragged rows, missing or non-numeric cells (with the file line
        number), series missing from the map, or unknown series in it.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if len(rows) < 2:
        raise PanelFormatError(f"{path}: need a header row and data rows")
    header = rows[0]
    if len(header) < 2:
        raise PanelFormatError(f"{path}: header must name at least one series")
    series_ids = [c.strip() for c in header[1:]]
    width = len(header)
    columns: list[list[float]] = [[] for _ in series_ids]
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != width:
            raise PanelFormatError(
                f"{path}: line {line_no}: expected {width} cells, got {len(row)}"
            )
        for j, cell in enumerate(row[1:]):
            text = cell.strip()
            if not text:
                raise PanelFormatError(
                    f"{path}: line {line_no}: missing value for series "
                    f"{series_ids[j]!r}"
                )
            try:
                columns[j].append(float(text))
            except ValueError:
                raise PanelFormatError(
                    f"{path}: line {line_no}: non-numeric cell {cell!r}"
                ) from None

    if isinstance(cluster_map, (str, Path)):
        cluster_map = load_cluster_map(cluster_map)
    labels = None
    if cluster_map is not None:
        unknown = set(cluster_map) - set(series_ids)
        if unknown:
            raise PanelFormatError(
                f"cluster map names unknown series: {sorted(unknown)}"
            )
        missing = set(series_ids) - set(cluster_map)
        if missing:
            raise PanelFormatError(
                f"cluster map is missing series: {sorted(missing)}"
            )
        labels = [cluster_map[s] for s in series_ids]
    try:
        return Panel(
            [list(col) for col in columns], series_ids, labels
        )
    except ValueError as exc:
        raise PanelFormatError(f"{path}: {exc}") from exc


def save_panel_csv(panel: Panel, dest) -> None:
    """Write a panel in the wide CSV format; inverse of the loader.

    dest may be a path or an open text file.
    """
    def _write(fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", *panel.series_ids])
        for t in range(panel.n_time):
            writer.writerow(
                [t + 1, *(repr(float(v)) for v in panel.values[:, t])]
            )

    if hasattr(dest, "write"):
        _write(dest)
    else:
        with open(dest, "w", newline="") as fh:
            _write(fh)


def save_cluster_map(panel: Panel, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series_id", "cluster_id"])
        for sid, label in zip(panel.series_ids, panel.cluster_of):
            writer.writerow([sid, label])


def load_scenario_config(path: str | Path) -> ScenarioConfig:
    """Read a scenario description from a JSON file."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PanelFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise PanelFormatError(f"{path}: expected a JSON object")
    try:
        return ScenarioConfig.from_dict(data)
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise PanelFormatError(f"{path}: {exc}") from exc


def save_scenario_config(config: ScenarioConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")
