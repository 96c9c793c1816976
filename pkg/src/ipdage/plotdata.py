"""Plot-ready output for sweep results: whitespace-delimited data and a bare SVG chart."""

from __future__ import annotations

import math

from .experiments import SweepResult, fmt

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]


def plot_columns(result: SweepResult) -> list[str]:
    return [c for c in result.columns[1:] if not c.endswith("_stderr")]


def to_dat(result: SweepResult) -> str:
    """One row per grid point, one column per series; stderr columns are kept for error bars."""
    lines = ["# " + " ".join(result.columns)]
    lines += [" ".join(fmt(v) for v in row) for row in result.rows]
    return "\n".join(lines) + "\n"


def to_svg(result: SweepResult, title: str = "", width: int = 640, height: int = 400) -> str:
    cols = plot_columns(result)
    xs = result.grid
    series = {c: result.column(c) for c in cols}
    finite = [v for c in cols for v in series[c] if math.isfinite(v)]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    left, right, top, bottom = 70, 130, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    if title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="18" text-anchor="middle">{title}</text>')
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{px(xv):.1f}" y="{top + ph + 15}" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<text x="{left - 5}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.5g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{result.variable}</text>')
    for k, c in enumerate(cols):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, series[c]) if math.isfinite(y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 * (k + 1)
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 34}" y="{ly}">{c}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
