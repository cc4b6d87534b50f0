"""CSV and JSON serialization of run artifacts.

Numbers are written with 17 significant digits so doubles survive a round
trip unchanged.
"""
from __future__ import annotations

import csv
import json
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .analysis import BlowupFit
from .grid import NormRecord

NORM_COLUMNS = ("t", "dt", "sup_u", "sup_v", "l2_u", "l2_v", "h1_u", "h1_v",
                "bkm_integral")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_table(path: str | Path, header: Sequence[str],
                columns: Sequence[Sequence[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = zip(*columns) if columns else ()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def read_table(path: str | Path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_norms_csv(path: str | Path, history: Sequence[NormRecord]) -> Path:
    columns = [[getattr(r, name) for r in history] for name in NORM_COLUMNS]
    if not history:
        columns = []
    return write_table(path, NORM_COLUMNS, columns)


def read_norms_csv(path: str | Path) -> list[NormRecord]:
    data = read_table(path)
    n = len(data["t"])
    return [NormRecord(t=data["t"][i], dt=data["dt"][i], sup_u=data["sup_u"][i],
                       sup_v=data["sup_v"][i], l2_u=data["l2_u"][i], l2_v=data["l2_v"][i],
                       h1_u=data["h1_u"][i], h1_v=data["h1_v"][i],
                       bkm_integrand=data["sup_u"][i] + data["sup_v"][i],
                       bkm_integral=data["bkm_integral"][i])
            for i in range(n)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: str | Path, obj) -> Path:
    """JSON with float repr (shortest round-trip) and Infinity allowed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: str | Path):
    return json.loads(Path(path).read_text())


def write_fit_json(path: str | Path, fit: BlowupFit, config: dict | None = None,
                   **extra) -> Path:
    return write_json(path, {"fit": fit.to_dict(), "config": config, **extra})


def read_fit_json(path: str | Path) -> BlowupFit:
    return BlowupFit.from_dict(read_json(path)["fit"])
