"""Dependency-free SVG emitters: heatmaps, line plots and texture quivers."""
from __future__ import annotations

import json
import math
from xml.sax.saxutils import escape

import numpy as np

from ..units import to_mhz

# Ch = 0 blue, 1 green, 2 red
COLOR_STOPS = ((0.0, (49, 54, 149)), (1.0, (77, 175, 74)), (2.0, (215, 48, 39)))
MISSING = "#bbbbbb"
SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def colormap(value: float) -> str:
    """Piecewise-linear 3-stop map over [0, 2], clamped."""
    if value is None or not math.isfinite(value):
        return MISSING
    v = min(max(float(value), COLOR_STOPS[0][0]), COLOR_STOPS[-1][0])
    for (a, ca), (b, cb) in zip(COLOR_STOPS, COLOR_STOPS[1:]):
        if v <= b:
            f = (v - a) / (b - a)
            rgb = [round(x + f * (y - x)) for x, y in zip(ca, cb)]
            return "#%02x%02x%02x" % tuple(rgb)
    return "#%02x%02x%02x" % COLOR_STOPS[-1][1]


def _num(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _open(width: int, height: int, title: str, provenance: dict | None) -> list:
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f"<title>{escape(title)}</title>"]
    if provenance:
        out.append(f"<desc>{escape(json.dumps(provenance, sort_keys=True))}</desc>")
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>')
    return out


def _colorbar(x0: float, y0: float, height: float) -> list:
    out = []
    n = 40
    for k in range(n):
        v = 2.0 * (n - 1 - k) / (n - 1)
        out.append(f'<rect x="{_num(x0)}" y="{_num(y0 + k * height / n)}" width="14" '
                   f'height="{_num(height / n + 0.5)}" fill="{colormap(v)}"/>')
    for v in (0, 1, 2):
        y = y0 + height * (1 - v / 2)
        out.append(f'<text x="{_num(x0 + 18)}" y="{_num(y + 4)}">{v}</text>')
    out.append(f'<text x="{_num(x0 - 2)}" y="{_num(y0 - 8)}">Ch</text>')
    return out


def heatmap_svg(pd, method: str | None = None, title: str = "") -> str:
    """Cells coloured by Ch (dynamical if present), axes in MHz."""
    spec = pd.spec
    if method is None:
        method = next((m for m in ("dynamical", "spectral", "monopole_count") if m in spec.methods), spec.methods[0])
    values = pd.grid(method)
    n1, n2 = spec.shape
    x_vals, y_vals = to_mhz(spec.axes[0].values), to_mhz(spec.axes[1].values)
    left, top, size = 60, 30, 360
    cw, ch = size / n1, size / n2
    width, height = left + size + 90, top + size + 50
    out = _open(width, height, title or spec.name, pd.provenance)
    for i in range(n1):
        for j in range(n2):
            y = top + size - (j + 1) * ch
            out.append(f'<rect x="{_num(left + i * cw)}" y="{_num(y)}" width="{_num(cw + 0.05)}" '
                       f'height="{_num(ch + 0.05)}" fill="{colormap(values[i, j])}"/>')
    out.append(f'<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black"/>')
    for k in (0, n1 // 2, n1 - 1):
        out.append(f'<text x="{_num(left + (k + 0.5) * cw)}" y="{top + size + 14}" text-anchor="middle">'
                   f"{_num(x_vals[k])}</text>")
    for k in (0, n2 // 2, n2 - 1):
        out.append(f'<text x="{left - 4}" y="{_num(top + size - (k + 0.5) * ch + 4)}" text-anchor="end">'
                   f"{_num(y_vals[k])}</text>")
    out.append(f'<text x="{left + size / 2}" y="{top + size + 34}" text-anchor="middle">'
               f"{escape(spec.axes[0].name)}/2π (MHz)</text>")
    out.append(f'<text x="14" y="{top + size / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + size / 2})">{escape(spec.axes[1].name)}/2π (MHz)</text>')
    out.append(f'<text x="{left}" y="18">{escape(title or spec.name)} ({escape(method)})</text>')
    out += _colorbar(left + size + 24, top + 20, size - 40)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_plot_svg(x, series: dict, xlabel: str, ylabel: str, title: str, provenance: dict | None = None) -> str:
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    left, top, w, h = 60, 30, 420, 260
    width, height = left + w + 150, top + h + 50
    lo = min(float(np.nanmin(v)) for v in ys.values())
    hi = max(float(np.nanmax(v)) for v in ys.values())
    if hi - lo < 1e-12:
        lo, hi = lo - 1, hi + 1
    x0, x1 = float(x.min()), float(x.max())
    if x1 - x0 < 1e-12:
        x1 = x0 + 1

    def px(v):
        return left + (v - x0) / (x1 - x0) * w

    def py(v):
        return top + h - (v - lo) / (hi - lo) * h

    out = _open(width, height, title, provenance)
    out.append(f'<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>')
    for k, (name, y) in enumerate(ys.items()):
        color = SERIES_COLORS[k % len(SERIES_COLORS)]
        pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(x, y) if math.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{left + w + 10}" y="{top + 14 + 16 * k}" fill="{color}">{escape(name)}</text>')
    for v in (lo, hi):
        out.append(f'<text x="{left - 4}" y="{_num(py(v) + 4)}" text-anchor="end">{v:.3g}</text>')
    for v in (x0, x1):
        out.append(f'<text x="{_num(px(v))}" y="{top + h + 14}" text-anchor="middle">{v:.3g}</text>')
    out.append(f'<text x="{left + w / 2}" y="{top + h + 34}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{top + h / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + h / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{left}" y="18">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def quiver_svg(grid, title: str = "texture", provenance: dict | None = None, stride: int = 2) -> str:
    """In-plane Bloch components as arrows over the zone, coloured by b_z."""
    pts = grid.points()
    ks = np.array([p.k for p in pts])
    span = float(np.abs(ks).max()) * 1.05
    size = 460
    scale = size / (2 * span)
    out = _open(size + 80, size + 40, title, provenance)
    hexagon = " ".join(f"{_num(size / 2 + scale * vx)},{_num(20 + size / 2 - scale * vy)}"
                       for vx, vy in grid.bz.vertices)
    out.append(f'<polygon points="{hexagon}" fill="none" stroke="black"/>')
    arrow = 0.35 * scale * grid.bz.b / max(grid.thetas.size / stride, 1) * 4
    for p in pts:
        i = int(round(p.theta / math.pi * (grid.thetas.size - 1)))
        j = int(round(p.phi / (2 * math.pi) * grid.phis.size))
        if i % stride or j % stride:
            continue
        cx, cy = size / 2 + scale * p.k[0], 20 + size / 2 - scale * p.k[1]
        bx, by, bz = p.bloch
        color = colormap(1.0 + bz)
        out.append(f'<line x1="{_num(cx)}" y1="{_num(cy)}" x2="{_num(cx + arrow * bx)}" '
                   f'y2="{_num(cy - arrow * by)}" stroke="{color}" stroke-width="1"/>')
        out.append(f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="1" fill="{color}"/>')
    out.append(f'<text x="10" y="14">{escape(title)} (colour: b_z from −1 to +1)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
