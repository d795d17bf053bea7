"""CSV and SVG writers.

Floats are written with 6 significant digits and every file ends with a
newline, so equal inputs always give equal bytes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, fields
from pathlib import Path

import numpy as np

from .experiments import CDF, SweepRecord
from .scenario import CoverageGrid

SWEEP_HEADER = [f.name for f in fields(SweepRecord)]
GRID_HEADER = ["x_m", "y_m", "loss_db", "rp_dbm", "server"]
CDF_HEADER = ["fraction", "sub_capacity_bps", "sys_capacity_bps"]


class OutputError(OSError):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0:
            return "0"  # avoids "-0"
        return f"{v:.6g}"
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    if not text.endswith("\n"):
        text += "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def sweep_csv(records: list[SweepRecord]) -> str:
    return _csv_text(SWEEP_HEADER, (astuple(r) for r in records))


def grid_csv(loss: CoverageGrid, rp: CoverageGrid) -> str:
    """One row per cell, x varying fastest."""
    if loss.grid != rp.grid:
        raise ValueError("loss and power maps are on different grids")
    xs, ys = loss.grid.centres()
    rows = ((x, y, loss.values[j, i], rp.values[j, i], loss.server[j, i])
            for j, y in enumerate(ys) for i, x in enumerate(xs))
    return _csv_text(GRID_HEADER, rows)


def cdf_csv(cdf: CDF) -> str:
    return _csv_text(CDF_HEADER, zip(cdf.fraction, cdf.sub_capacity_bps, cdf.sys_capacity_bps))


def _colour(t: float) -> str:
    # blue (low) -> yellow -> red (high)
    stops = ((0.0, (49, 54, 149)), (0.5, (255, 255, 191)), (1.0, (165, 0, 38)))
    t = min(max(t, 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(stops, stops[1:]):
        if t <= t1:
            w = (t - t0) / (t1 - t0)
            r, g, b = (round(a + (b_ - a) * w) for a, b_ in zip(c0, c1))
            return f"#{r:02x}{g:02x}{b:02x}"
    return "#a50026"


def heatmap_svg(grid: CoverageGrid, cell_px: int = 4) -> str:
    """Self-contained SVG with one rect per cell; row 0 of the map is at the bottom."""
    values = np.asarray(grid.values, dtype=float)
    ny, nx = values.shape
    finite = values[np.isfinite(values)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    w, h = nx * cell_px, ny * cell_px
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}">',
           f"<title>{grid.quantity} from {fmt(lo)} to {fmt(hi)}</title>"]
    for j in range(ny):
        y = (ny - 1 - j) * cell_px
        for i in range(nx):
            v = values[j, i]
            colour = _colour((v - lo) / span) if math.isfinite(v) else "#000000"
            out.append(f'<rect x="{i * cell_px}" y="{y}" width="{cell_px}" '
                       f'height="{cell_px}" fill="{colour}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
