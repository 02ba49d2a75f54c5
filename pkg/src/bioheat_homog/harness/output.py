"""Report and trajectory writers (CSV, JSON, npz)."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def write_json(obj: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def write_study_csv(report, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(report.HEADER)
        for r in report.rows:
            w.writerow([repr(float(getattr(r, name))) for name in report.HEADER])
    return path


def read_study_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def study_json(report) -> dict:
    return {
        "rows": [{name: float(getattr(r, name)) for name in report.HEADER} for r in report.rows],
        "energy_ratio": float(report.energy_ratio()),
        "cell": report.cell,
    }


def write_trajectory(times: np.ndarray, fields: np.ndarray, shape: tuple[int, ...], path: str | Path,
                     fmt: str = "csv", stride: int = 1, extra: dict[str, np.ndarray] | None = None,
                     value_name: str = "T") -> Path:
    """Dump ``fields[k]`` (flat, row-major over ``shape``) for every ``stride``-th level.

    CSV columns are ``t, i0, .., i{d-1}, <value_name>[, extra...]``; npz stores
    ``times``, ``shape`` and a ``(levels, *shape)`` array.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sel = np.arange(0, len(times), stride)
    extra = extra or {}
    if fmt == "npz":
        arrays = {"times": np.asarray(times)[sel], "shape": np.asarray(shape),
                  value_name: np.asarray(fields)[sel].reshape((len(sel),) + tuple(shape))}
        for k, v in extra.items():
            arrays[k] = np.asarray(v).reshape(tuple(shape))
        np.savez(path.with_suffix(".npz"), **arrays)
        return path.with_suffix(".npz")
    idx = np.indices(shape).reshape(len(shape), -1).T
    with open(path.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["t"] + [f"i{a}" for a in range(len(shape))] + [value_name] + list(extra))
        ex = [np.asarray(v).ravel() for v in extra.values()]
        for k in sel:
            t = repr(float(times[k]))
            row_vals = fields[k]
            for c in range(idx.shape[0]):
                w.writerow([t, *idx[c].tolist(), repr(float(row_vals[c])), *(e[c].item() for e in ex)])
    return path.with_suffix(".csv")
