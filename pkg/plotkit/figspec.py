"""Shared plumbing for the rendering scripts: figure options, CSV loading,
and the symmetric diverging color scale.

These scripts are pure views of the CSV content; nothing here recomputes or
alters the numbers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """The input CSV does not match the documented schema."""


@dataclass
class FigureSpec:
    """Rendering options for one output figure."""

    output: str
    colormap: str = "RdBu_r"  # diverging; midpoint pinned to W = 0
    x_label: str = "x"
    y_label: str = "p"
    title: str | None = None
    dpi: int = 150


def symmetric_range(values: np.ndarray) -> tuple[float, float]:
    """Color limits symmetric about zero, so the diverging colormap's
    midpoint always sits at W = 0."""
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if peak <= 0.0:
        peak = 1e-12
    return -peak, peak


def load_wigner_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read the (x, p, W) grid CSV written by the simulator CLI.

    Returns the x axis, the p axis and W as a (len(x), len(p)) matrix.
    Raises SchemaError on a wrong header, malformed rows, or an incomplete
    grid.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "p", "W"]:
        raise SchemaError(f"{path}: expected header x,p,W, got {rows[:1]}")
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: malformed row ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] == 0:
        raise SchemaError(f"{path}: expected rows of x,p,W values")
    xs = np.unique(data[:, 0])
    ps = np.unique(data[:, 1])
    if xs.size * ps.size != data.shape[0]:
        raise SchemaError(f"{path}: grid is incomplete "
                          f"({data.shape[0]} rows for {xs.size}x{ps.size})")
    values = np.full((xs.size, ps.size), np.nan)
    ix = np.searchsorted(xs, data[:, 0])
    ip = np.searchsorted(ps, data[:, 1])
    values[ix, ip] = data[:, 2]
    if np.any(np.isnan(values)):
        raise SchemaError(f"{path}: duplicate or missing grid points")
    return xs, ps, values


def load_sweep_csv(path: str | Path) -> tuple[str, list[dict]]:
    """Read the sweep CSV written by the simulator CLI.

    Returns the sweep parameter name (second column) and the parsed rows;
    rows carrying a nonempty error column are kept (the caller decides how
    to display them).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or len(reader.fieldnames) < 3:
            raise SchemaError(f"{path}: missing sweep header")
        required = {"index", "epsilon", "s_db", "p_suc", "error"}
        missing = required - set(reader.fieldnames)
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        param = reader.fieldnames[1]
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no sweep rows")
    return param, rows
