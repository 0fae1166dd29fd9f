"""CSV, SVG and manifest writers for run outputs."""

from __future__ import annotations

import json
import math
import os
import platform
from xml.sax.saxutils import escape

import numpy as np

from . import __version__

MANIFEST = "manifest.json"
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#000000", "#ff7f0e", "#8c564b")


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path, header, rows):
    """Comma-separated values, floats at full double precision."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def write_columns(path, columns: dict):
    names = list(columns)
    write_csv(path, names, zip(*(columns[n] for n in names)))


def read_csv(path):
    """(header, rows of strings); for tests and quick inspection."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def write_svg(path, x, curves: dict, x_label="", y_label="", title="", width=640, height=400):
    """Minimal line chart: one polyline per curve, axes with min/max labels.

    Non-finite points break the line.
    """
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in curves.items()}
    finite = np.concatenate([y[np.isfinite(y)] for y in ys.values()] or [np.zeros(1)])
    if finite.size == 0:
        finite = np.zeros(1)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(finite.min()), float(finite.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = 70, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    if title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>')
    for k, (name, y) in enumerate(ys.items()):
        color = _COLORS[k % len(_COLORS)]
        segment = []
        for xv, yv in zip(x, y):
            if math.isfinite(yv):
                segment.append(f"{px(xv):.2f},{py(yv):.2f}")
            elif segment:
                out.append(_polyline(segment, color))
                segment = []
        if segment:
            out.append(_polyline(segment, color))
        ly = top + 14 + 16 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly}">{escape(name)}</text>')
    out += [
        f'<text x="{left}" y="{top + ph + 15}" text-anchor="middle">{x0:.4g}</text>',
        f'<text x="{left + pw}" y="{top + ph + 15}" text-anchor="middle">{x1:.4g}</text>',
        f'<text x="{left - 5}" y="{top + ph}" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{left - 5}" y="{top + 10}" text-anchor="end">{y1:.4g}</text>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(x_label)}</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(y_label)}</text>',
        "</svg>",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _polyline(points, color):
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(points)}"/>'


def write_manifest(out_dir, config_text: str, command: list, wall_time: float, stages: dict):
    """One manifest.json per output directory; rewritten on every run."""
    doc = {
        "version": __version__,
        "command": list(command),
        "config": config_text,
        "wall_time_s": wall_time,
        "stages_s": dict(stages),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    path = os.path.join(out_dir, MANIFEST)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
