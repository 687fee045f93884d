"""Minimal deterministic SVG scatter plots.

Hand-rolled so that identical inputs produce byte-identical files; used by
the command-line figure presets.  Display artifact only: fixed canvas,
linear axes, optional shaded vertical bands, one marker per series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

__all__ = ["Series", "scatter_svg"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f")


@dataclass(frozen=True)
class Series:
    x: tuple[float, ...]
    y: tuple[float, ...]
    label: str = ""
    marker: str = "circle"   # circle | cross | square
    color: str = ""


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _marker_svg(kind: str, px: float, py: float, color: str) -> str:
    if kind == "cross":
        d = 3.2
        return (f'<path d="M{_fmt(px-d)} {_fmt(py-d)} L{_fmt(px+d)} {_fmt(py+d)} '
                f'M{_fmt(px-d)} {_fmt(py+d)} L{_fmt(px+d)} {_fmt(py-d)}" '
                f'stroke="{color}" stroke-width="1.4" fill="none"/>')
    if kind == "square":
        d = 2.6
        return (f'<rect x="{_fmt(px-d)}" y="{_fmt(py-d)}" width="{_fmt(2*d)}" '
                f'height="{_fmt(2*d)}" fill="{color}"/>')
    return f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="2.4" fill="{color}"/>'


def scatter_svg(path, series: Sequence[Series], title: str = "",
                xlabel: str = "", ylabel: str = "",
                xlim: tuple[float, float] | None = None,
                ylim: tuple[float, float] | None = None,
                vbands: Sequence[tuple[float, float]] = (),
                width: int = 760, height: int = 520) -> None:
    """Write a scatter plot of the series to an SVG file."""
    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y]
    if xlim is None:
        lo, hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
        pad = 0.05 * (hi - lo) or 0.5
        xlim = (lo - pad, hi + pad)
    if ylim is None:
        lo, hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
        pad = 0.05 * (hi - lo) or 0.5
        ylim = (lo - pad, hi + pad)
    ml, mr, mt, mb = 64, 16, 34, 46
    pw, ph = width - ml - mr, height - mt - mb

    def px(x: float) -> float:
        return ml + (x - xlim[0]) / (xlim[1] - xlim[0]) * pw

    def py(y: float) -> float:
        return mt + (ylim[1] - y) / (ylim[1] - ylim[0]) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for lo, hi in vbands:
        a, b = max(lo, xlim[0]), min(hi, xlim[1])
        if b > a:
            out.append(
                f'<rect x="{_fmt(px(a))}" y="{mt}" width="{_fmt(px(b)-px(a))}" '
                f'height="{ph}" fill="#a6cee3" fill-opacity="0.45"/>'
            )
    out.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#222222" stroke-width="1"/>'
    )
    for t in _nice_ticks(*xlim):
        x = px(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{mt+ph}" x2="{_fmt(x)}" '
                   f'y2="{mt+ph+4}" stroke="#222222" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(x)}" y="{mt+ph+17}" font-size="11" '
                   f'text-anchor="middle" font-family="sans-serif">{_fmt(t)}</text>')
    for t in _nice_ticks(*ylim):
        y = py(t)
        out.append(f'<line x1="{ml-4}" y1="{_fmt(y)}" x2="{ml}" y2="{_fmt(y)}" '
                   f'stroke="#222222" stroke-width="1"/>')
        out.append(f'<text x="{ml-7}" y="{_fmt(y+3.5)}" font-size="11" '
                   f'text-anchor="end" font-family="sans-serif">{_fmt(t)}</text>')
    if title:
        out.append(f'<text x="{width/2:.1f}" y="20" font-size="14" '
                   f'text-anchor="middle" font-family="sans-serif">{title}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw/2:.1f}" y="{height-10}" font-size="12" '
                   f'text-anchor="middle" font-family="sans-serif">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{mt + ph/2:.1f}" font-size="12" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'transform="rotate(-90 16 {mt + ph/2:.1f})">{ylabel}</text>')
    legend_y = mt + 14
    for i, s in enumerate(series):
        color = s.color or _COLORS[i % len(_COLORS)]
        for xv, yv in zip(s.x, s.y):
            if xlim[0] <= xv <= xlim[1] and ylim[0] <= yv <= ylim[1]:
                out.append(_marker_svg(s.marker, px(xv), py(yv), color))
        if s.label:
            out.append(_marker_svg(s.marker, ml + pw - 130, legend_y, color))
            out.append(f'<text x="{ml + pw - 120}" y="{legend_y + 3.5}" '
                       f'font-size="11" font-family="sans-serif">{s.label}</text>')
            legend_y += 16
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
