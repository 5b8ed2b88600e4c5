"""Minimal SVG line plots (polylines in a fixed viewport, no dependencies)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["Series", "svg_lines", "write_svg"]

WIDTH, HEIGHT = 800, 450
MARGIN = dict(left=60, right=20, top=40, bottom=45)
MAX_POINTS = 2000


@dataclass(frozen=True)
class Series:
    t: np.ndarray
    y: np.ndarray
    color: str = "black"
    width: float = 1.0
    label: str = ""


def _thin(t, y):
    if len(t) <= MAX_POINTS:
        return t, y
    idx = np.unique(np.linspace(0, len(t) - 1, MAX_POINTS).round().astype(int))
    return t[idx], y[idx]


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def svg_lines(series: list[Series], title: str = "", xlabel: str = "t") -> str:
    """Render ``series`` on shared axes and return the SVG document."""
    if not series:
        raise ValueError("nothing to plot")
    x0 = min(float(s.t[0]) for s in series)
    x1 = max(float(s.t[-1]) for s in series)
    y0 = min(float(np.min(s.y)) for s in series)
    y1 = max(float(np.max(s.y)) for s in series)
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return left + (np.asarray(x) - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - np.asarray(y)) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for v in _ticks(x0, x1):
        x = float(sx(v))
        out.append(f'<text x="{x:.1f}" y="{top + ph + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1):
        y = float(sy(v))
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    for s in series:
        t, y = _thin(np.asarray(s.t, dtype=float), np.asarray(s.y, dtype=float))
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(t), sy(y)))
        out.append(
            f'<polyline fill="none" stroke="{s.color}" stroke-width="{s.width}" points="{pts}"/>'
        )
    labelled = [s for s in series if s.label]
    for i, s in enumerate(labelled):
        y = top + 14 + 16 * i
        x = left + pw - 150
        out.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 20}" y2="{y - 4}" stroke="{s.color}" stroke-width="{max(s.width, 1.5)}"/>')
        out.append(f'<text x="{x + 26}" y="{y}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series: list[Series], title: str = "", xlabel: str = "t") -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(svg_lines(series, title, xlabel))
    return path
