"""Minimal dependency-free SVG and ASCII rendering for CLI tables.

Plots are conveniences for eyeballing sweeps; everything quantitative lives
in the CSV/JSON tables.  The SVG output is deterministic (no timestamps, no
randomness) so artifacts are byte-reproducible.
"""
from __future__ import annotations

import math
from typing import Sequence

_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_ASCII_MARKS = "ox+*#%"


def _finite(values):
    return [v for v in values if v is not None and math.isfinite(v)]


def _span(values, pad=0.05):
    vs = _finite(values)
    if not vs:
        return 0.0, 1.0
    lo, hi = min(vs), max(vs)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    width = hi - lo
    return lo - pad * width, hi + pad * width


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_svg(xs: Sequence[float], series: dict, x_label: str, title: str,
             width: int = 640, height: int = 440) -> str:
    """Polyline chart: one line per (name -> y values) entry in ``series``."""
    ml, mr, mt, mb = 64, 16, 36, 48
    pw, ph = width - ml - mr, height - mt - mb
    x_lo, x_hi = _span(xs)
    all_y = [y for ys in series.values() for y in ys]
    y_lo, y_hi = _span(all_y)

    def px(x):
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return mt + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        parts.append(
            f'<text x="{px(t):.1f}" y="{height - mb + 16}" text-anchor="middle" '
            f'font-family="monospace" font-size="10">{t:.4g}</text>')
    for t in _ticks(y_lo, y_hi):
        parts.append(
            f'<text x="{ml - 6}" y="{py(t):.1f}" text-anchor="end" '
            f'font-family="monospace" font-size="10">{t:.4g}</text>')
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">{x_label}</text>')
    for i, (name, ys) in enumerate(series.items()):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        points = " ".join(
            f"{px(x):.2f},{py(y):.2f}"
            for x, y in zip(xs, ys)
            if y is not None and math.isfinite(y))
        parts.append(f'<polyline points="{points}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{ml + 8}" y="{mt + 16 + 14 * i}" fill="{color}" '
            f'font-family="monospace" font-size="11">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_ascii(xs: Sequence[float], series: dict, x_label: str, title: str,
               width: int = 72, height: int = 20) -> str:
    """Character-canvas chart with one mark style per series."""
    x_lo, x_hi = _span(xs, pad=0.0)
    all_y = [y for ys in series.values() for y in ys]
    y_lo, y_hi = _span(all_y, pad=0.0)
    canvas = [[" "] * width for _ in range(height)]
    for i, (name, ys) in enumerate(series.items()):
        mark = _ASCII_MARKS[i % len(_ASCII_MARKS)]
        for x, y in zip(xs, ys):
            if y is None or not math.isfinite(y):
                continue
            col = int(round((x - x_lo) / (x_hi - x_lo) * (width - 1)))
            row = int(round((1.0 - (y - y_lo) / (y_hi - y_lo)) * (height - 1)))
            canvas[row][col] = mark
    legend = "   ".join(
        f"{_ASCII_MARKS[i % len(_ASCII_MARKS)]} {name}"
        for i, name in enumerate(series))
    lines = [title, f"y: [{y_lo:.4g}, {y_hi:.4g}]"]
    lines += ["|" + "".join(row) + "|" for row in canvas]
    lines.append(f"x: {x_lo:.4g} .. {x_hi:.4g}  ({x_label})")
    lines.append(legend)
    return "\n".join(lines) + "\n"


def phase_grid_ascii(p_values, r_values, letters) -> str:
    """Letter grid for a (p, r) phase diagram; rows are r descending."""
    lines = [f"r \\ p: {p_values[0]:.4g} .. {p_values[-1]:.4g}"]
    n_r = len(r_values)
    for j in range(n_r - 1, -1, -1):
        row = "".join(letters[i][j] for i in range(len(p_values)))
        lines.append(f"{r_values[j]:8.4g} {row}")
    return "\n".join(lines) + "\n"


def phase_grid_svg(p_values, r_values, letters, title: str) -> str:
    """Colored cell grid for a (p, r) phase diagram."""
    colors = {"Q": "#1f77b4", "C": "#2ca02c", "N": "#d62728", "?": "#cccccc"}
    cell = 28
    ml, mt = 64, 36
    width = ml + cell * len(p_values) + 16
    height = mt + cell * len(r_values) + 48
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>',
    ]
    for i in range(len(p_values)):
        for j in range(len(r_values)):
            x = ml + i * cell
            y = mt + (len(r_values) - 1 - j) * cell
            c = colors.get(letters[i][j], "#cccccc")
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" '
                         f'height="{cell}" fill="{c}" stroke="white"/>')
    parts.append(
        f'<text x="{ml}" y="{height - 12}" font-family="monospace" '
        f'font-size="11">p ->  (r increases upward); Q/C/N = quantum/classical/noisy</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
