"""Standalone SVG line and scatter charts.

Line series are drawn as ``<polyline>`` (with optional error bars), scatter
series as one ``<circle>`` per point. Legend swatches are ``<rect>`` so that
circles count markers only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from html import escape

import numpy as np

from .errors import IoError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    mode: str = "line"  # "line" or "scatter"
    yerr: np.ndarray | None = None
    color: str | None = None
    marker_size: float = 2.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).ravel()
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.x.size != self.y.size:
            raise ValueError("x and y differ in length")
        if self.mode not in ("line", "scatter"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.yerr is not None:
            self.yerr = np.asarray(self.yerr, dtype=float).ravel()


@dataclass
class Axes:
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    xlim: tuple | None = None
    ylim: tuple | None = None
    equal_aspect: bool = False
    width: int = 640
    height: int = 480


def nice_ticks(lo: float, hi: float, target: int = 6) -> np.ndarray:
    """Ticks at multiples of 1, 2 or 5 times a power of ten inside ``[lo, hi]``."""
    if not hi > lo:
        return np.array([lo])
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = np.arange(first, hi + 1e-9 * step, step)
    return np.round(ticks / step) * step


def _fmt_tick(v: float) -> str:
    s = f"{v:.6g}"
    return "0" if s in ("-0", "0") else s


def _limits(series, axis, pad=0.05):
    vals = []
    for s in series:
        v = s.x if axis == "x" else s.y
        if axis == "y" and s.yerr is not None:
            v = np.concatenate([v - s.yerr, v + s.yerr])
        vals.append(v[np.isfinite(v)])
    v = np.concatenate(vals) if vals else np.empty(0)
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        d = abs(lo) * 0.1 or 1.0
        return lo - d, hi + d
    d = (hi - lo) * pad
    return lo - d, hi + d


def render_svg(series: list[Series], axes: Axes | None = None) -> str:
    if not series:
        raise ValueError("need at least one series")
    ax = axes or Axes()
    W, H = ax.width, ax.height
    ml, mr, mt, mb = 70, 20, 40 if ax.title else 20, 55
    pw, ph = W - ml - mr, H - mt - mb
    x0, x1 = ax.xlim or _limits(series, "x")
    y0, y1 = ax.ylim or _limits(series, "y")
    if ax.equal_aspect:
        # widen the tighter range so one unit has the same length on both axes
        sx, sy = (x1 - x0) / pw, (y1 - y0) / ph
        if sx > sy:
            c, h = 0.5 * (y0 + y1), 0.5 * sx * ph
            y0, y1 = c - h, c + h
        else:
            c, h = 0.5 * (x0 + x1), 0.5 * sy * pw
            x0, x1 = c - h, c + h

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>']
    if ax.title:
        out.append(f'<text x="{W / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(ax.title)}</text>')
    out.append(f'<defs><clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath></defs>')
    out.append('<g clip-path="url(#plot)">')
    for k, s in enumerate(series):
        color = s.color or PALETTE[k % len(PALETTE)]
        ok = np.isfinite(s.x) & np.isfinite(s.y)
        if s.mode == "line":
            pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(s.x[ok], s.y[ok]))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            for a, b in zip(s.x[ok], s.y[ok]):
                out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="{s.marker_size:g}" fill="{color}"/>')
        if s.yerr is not None:
            for a, b, e in zip(s.x[ok], s.y[ok], s.yerr[ok]):
                if np.isfinite(e):
                    out.append(f'<line x1="{X(a):.2f}" y1="{Y(b - e):.2f}" x2="{X(a):.2f}" y2="{Y(b + e):.2f}" '
                               f'stroke="{color}" stroke-width="1"/>')
    out.append("</g>")
    # frame, ticks, labels
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in nice_ticks(x0, x1):
        px = X(t)
        out.append(f'<line x1="{px:.2f}" y1="{mt + ph}" x2="{px:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{mt + ph + 18}" text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in nice_ticks(y0, y1):
        py = Y(t)
        out.append(f'<line x1="{ml - 5}" y1="{py:.2f}" x2="{ml}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt_tick(t)}</text>')
    if ax.xlabel:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">{escape(ax.xlabel)}</text>')
    if ax.ylabel:
        out.append(f'<text transform="translate(16,{mt + ph / 2:.1f}) rotate(-90)" '
                   f'text-anchor="middle">{escape(ax.ylabel)}</text>')
    labelled = [(k, s) for k, s in enumerate(series) if s.label]
    for row, (k, s) in enumerate(labelled):
        color = s.color or PALETTE[k % len(PALETTE)]
        ly = mt + 12 + 18 * row
        out.append(f'<rect x="{ml + pw - 130}" y="{ly - 8}" width="14" height="10" fill="{color}"/>')
        out.append(f'<text x="{ml + pw - 110}" y="{ly + 1}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series: list[Series], axes: Axes | None = None) -> None:
    text = render_svg(series, axes)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
