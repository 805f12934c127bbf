"""Tiny dependency-free SVG line plots."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"]
DASHES = {"input": "", "stored": "6,3", "retrieved": "2,2"}


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    dash: str = ""


@dataclass
class Panel:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series]


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def render(panels: Sequence[Panel], width: int = 520, height: int = 380) -> str:
    """Side-by-side panels, one ``<path>`` per series."""
    total_w = width * len(panels)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{height}" '
        f'viewBox="0 0 {total_w} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{total_w}" height="{height}" fill="white"/>',
    ]
    for k, panel in enumerate(panels):
        out.extend(_panel(panel, k * width, width, height))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _panel(panel: Panel, x0: float, width: int, height: int) -> list[str]:
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    xs = [v for s in panel.series for v in s.x]
    ys = [v for s in panel.series for v in s.y]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(min(ys), 0.0), max(ys)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    yhi += 0.05 * (yhi - ylo)

    def sx(v):
        return x0 + ml + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return mt + ph - (v - ylo) / (yhi - ylo) * ph

    els = [
        f'<g class="panel">',
        f'<text x="{x0 + ml + pw / 2:.2f}" y="{mt - 10}" text-anchor="middle">{escape(panel.title)}</text>',
        f'<line x1="{x0 + ml}" y1="{mt + ph}" x2="{x0 + ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{x0 + ml}" y1="{mt}" x2="{x0 + ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for t in _nice_ticks(xlo, xhi):
        if xlo - 1e-12 <= t <= xhi + 1e-12:
            els.append(f'<line x1="{sx(t):.2f}" y1="{mt + ph}" x2="{sx(t):.2f}" y2="{mt + ph + 4}" stroke="black"/>')
            els.append(f'<text x="{sx(t):.2f}" y="{mt + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(ylo, yhi):
        if ylo - 1e-12 <= t <= yhi + 1e-12:
            els.append(f'<line x1="{x0 + ml - 4}" y1="{sy(t):.2f}" x2="{x0 + ml}" y2="{sy(t):.2f}" stroke="black"/>')
            els.append(f'<text x="{x0 + ml - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    els.append(f'<text x="{x0 + ml + pw / 2:.2f}" y="{height - 8}" text-anchor="middle">{escape(panel.xlabel)}</text>')
    els.append(
        f'<text x="{x0 + 14}" y="{mt + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 {x0 + 14} {mt + ph / 2:.2f})">{escape(panel.ylabel)}</text>'
    )
    for i, s in enumerate(panel.series):
        color = PALETTE[i % len(PALETTE)]
        d = " ".join(f"{'M' if j == 0 else 'L'}{sx(a):.2f},{sy(b):.2f}" for j, (a, b) in enumerate(zip(s.x, s.y)))
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        els.append(f'<path class="series" data-label="{escape(s.label)}" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = mt + 14 + 16 * i
        lx = x0 + ml + pw - 120
        els.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="1.5"{dash}/>')
        els.append(f'<text x="{lx + 25}" y="{ly}">{escape(s.label)}</text>')
    els.append("</g>")
    return els
