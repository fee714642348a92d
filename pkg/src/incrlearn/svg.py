"""Minimal SVG emitters for accuracy curves and confusion heatmaps."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def line_plot(series: dict, path, title: str = "", xlabel: str = "", ylabel: str = "",
              ylim=(0.0, 1.0), width: int = 520, height: int = 360) -> None:
    """``series`` maps a legend name to ``(xs, ys)`` or ``(xs, ys, yerr)``."""
    ml, mr, mt, mb = 60, 130, 36, 48
    pw, ph = width - ml - mr, height - mt - mb
    xs_all = np.concatenate([np.asarray(v[0], dtype=float) for v in series.values()])
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    if x1 == x0:
        x1 = x0 + 1.0
    y0, y1 = ylim
    sx = lambda x: ml + (x - x0) / (x1 - x0) * pw
    sy = lambda y: mt + ph - (min(max(y, y0), y1) - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for k in range(6):
        y = y0 + (y1 - y0) * k / 5
        out.append(f'<line x1="{ml}" x2="{ml + pw}" y1="{sy(y):.1f}" y2="{sy(y):.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{ml - 6}" y="{sy(y) + 4:.1f}" text-anchor="end">{y:.2f}</text>')
    for x in np.unique(xs_all):
        out.append(f'<text x="{sx(x):.1f}" y="{mt + ph + 16}" text-anchor="middle">{x:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 14 {mt + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, vals) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        xs, ys = np.asarray(vals[0], float), np.asarray(vals[1], float)
        if len(vals) > 2:
            for x, y, e in zip(xs, ys, np.asarray(vals[2], float)):
                out.append(f'<line x1="{sx(x):.1f}" x2="{sx(x):.1f}" y1="{sy(y - e):.1f}" y2="{sy(y + e):.1f}" stroke="{color}"/>')
        pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{color}"/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" x2="{ml + pw + 28}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 32}" y="{ly + 4}">{escape(str(name))}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def heatmap(matrix, path, title: str = "", log1p: bool = True, cell: int = 0) -> None:
    """Grey-scale heatmap; rows are true classes, columns predictions."""
    M = np.asarray(matrix, dtype=float)
    if log1p:
        M = np.log1p(M)
    n = M.shape[0]
    cell = cell or max(4, min(40, 400 // max(n, 1)))
    top = 30
    size = n * cell
    peak = M.max() if M.size and M.max() > 0 else 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 20}" height="{size + top + 10}" font-family="sans-serif" font-size="12">',
           f'<rect width="{size + 20}" height="{size + top + 10}" fill="white"/>',
           f'<text x="{(size + 20) / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>']
    for i in range(n):
        for j in range(n):
            v = int(round(255 * (1.0 - M[i, j] / peak)))
            out.append(f'<rect x="{10 + j * cell}" y="{top + i * cell}" width="{cell}" height="{cell}" fill="rgb({v},{v},{v})"/>')
    out.append(f'<rect x="10" y="{top}" width="{size}" height="{size}" fill="none" stroke="#333"/>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
