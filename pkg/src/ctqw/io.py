"""CSV/JSON writers for series, sweep tables and snapshots.

CSV output is comma separated with one header row, LF line endings and
numbers printed with 17 significant digits, so identical results give
byte-identical files. Every output directory also gets ``manifest.json``
holding the resolved config, the engine version and a result summary.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from ctqw import __version__
from ctqw.observables import ObservableSeries

MANIFEST = "manifest.json"


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _write(path: Path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_csv(path, header, columns) -> Path:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(fmt(v) for v in row))
    return _write(Path(path), "\n".join(lines) + "\n")


def write_json(path, payload) -> Path:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    return _write(Path(path), text + "\n")


def series_columns(series: ObservableSeries) -> dict:
    ratio = series.sigma_ratio
    if ratio is None:
        ratio = np.full(len(series), np.nan)
    return {
        "time": series.time,
        "sigma": series.sigma,
        "sigma_ratio": ratio,
        "shannon": series.shannon,
        "ipr": series.ipr,
    }


def write_series(series: ObservableSeries, path, format: str = "csv") -> Path:
    cols = series_columns(series)
    if format == "csv":
        return write_csv(path, list(cols), list(cols.values()))
    return write_json(path, cols)


def write_table(table, path, format: str = "csv") -> Path:
    """Sweep table with columns ``(beta|omega, sigma_ratio)``."""
    if format == "csv":
        return write_csv(path, [table.parameter, "sigma_ratio"], [table.values, table.sigma_ratio])
    return write_json(path, {table.parameter: table.values, "sigma_ratio": table.sigma_ratio})


def write_profile(sites, values, column, path) -> Path:
    return write_csv(path, ["j", column], [np.asarray(sites, dtype=int), values])


def write_manifest(directory, config: dict, files, summary=None) -> Path:
    payload = {
        "engine": "ctqw",
        "version": __version__,
        "config": config,
        "files": sorted(Path(f).name for f in files),
        "summary": summary or {},
    }
    return write_json(Path(directory) / MANIFEST, payload)


def prepare_dir(directory) -> Path:
    directory = Path(directory)
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {directory}: {exc.strerror or exc}") from exc
    return directory
