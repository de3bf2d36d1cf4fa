#!/usr/bin/env python3
"""Render a sweep CSV as squeezing and success-probability curves, one
series per loss value.

Usage: render_sweep.py sweep.csv out.png [--title ...]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from figspec import FigureSpec, SchemaError, load_sweep_csv


def render_sweep(csv_path: str | Path, spec: FigureSpec) -> Path:
    param, rows = load_sweep_csv(csv_path)
    series: dict[str, list[tuple[float, float, float]]] = {}
    for row in rows:
        if row["error"]:
            continue  # failed points carry no numbers to draw
        series.setdefault(row["epsilon"], []).append(
            (float(row[param]), float(row["s_db"]), float(row["p_suc"])))
    if not series:
        raise SchemaError(f"{csv_path}: no plottable rows")

    fig, (ax_top, ax_bottom) = plt.subplots(2, 1, figsize=(5.2, 6.0), sharex=True)
    for eps in sorted(series, key=float):
        pts = sorted(series[eps])
        xs = [p[0] for p in pts]
        ax_top.plot(xs, [p[1] for p in pts], marker="o", markersize=3,
                    label=f"eps={float(eps):g}")
        ax_bottom.plot(xs, [p[2] for p in pts], marker="o", markersize=3)
    ax_top.set_ylabel("squeezing (dB)")
    ax_top.legend()
    ax_bottom.set_ylabel("success probability")
    ax_bottom.set_xlabel(param)
    if spec.title:
        ax_top.set_title(spec.title)
    out = Path(spec.output)
    fig.savefig(out, dpi=spec.dpi, bbox_inches="tight")
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input", help="sweep CSV from the simulator CLI")
    parser.add_argument("output", help="raster output path (png)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    spec = FigureSpec(output=args.output, title=args.title, dpi=args.dpi)
    render_sweep(args.input, spec)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
