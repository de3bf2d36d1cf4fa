#!/usr/bin/env python3
"""Render a Wigner grid CSV (columns x,p,W) as a heatmap with a diverging
colormap pinned to W = 0 at the midpoint.

Usage: render_wigner.py wigner.csv out.png [--cmap RdBu_r] [--title ...]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from figspec import FigureSpec, load_wigner_csv, symmetric_range


def render_wigner(csv_path: str | Path, spec: FigureSpec) -> Path:
    xs, ps, values = load_wigner_csv(csv_path)
    vmin, vmax = symmetric_range(values)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = ax.pcolormesh(xs, ps, values.T, cmap=spec.colormap,
                         vmin=vmin, vmax=vmax, shading="nearest")
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.set_aspect("equal")
    if spec.title:
        ax.set_title(spec.title)
    fig.colorbar(mesh, ax=ax, label="W")
    out = Path(spec.output)
    fig.savefig(out, dpi=spec.dpi, bbox_inches="tight")
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input", help="wigner grid CSV (x,p,W)")
    parser.add_argument("output", help="raster output path (png)")
    parser.add_argument("--cmap", default="RdBu_r")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    spec = FigureSpec(output=args.output, colormap=args.cmap,
                      title=args.title, dpi=args.dpi)
    render_wigner(args.input, spec)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
