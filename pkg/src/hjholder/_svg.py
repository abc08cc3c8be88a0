"""Minimal standalone SVG line plots (no display server, byte-deterministic)."""

from __future__ import annotations

import math

_PALETTE = ["#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#e67e22", "#2c3e50"]
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 34, 46


def _fmt(x: float) -> str:
    return "%.6g" % x


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / n))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return out


def line_plot_svg(path: str, series, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Write a line plot; series is a list of (label, xs, ys) triples."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    axis = f'stroke="#333" stroke-width="1"'
    parts.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" {axis}/>')
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" {axis}/>')
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        parts.append(f'<line x1="{_fmt(x)}" y1="{_H - _MB}" x2="{_fmt(x)}" y2="{_H - _MB + 4}" {axis}/>')
        parts.append(
            f'<text x="{_fmt(x)}" y="{_H - _MB + 17}" font-size="11" text-anchor="middle" '
            f'font-family="sans-serif">{_fmt(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        parts.append(f'<line x1="{_ML - 4}" y1="{_fmt(y)}" x2="{_ML}" y2="{_fmt(y)}" {axis}/>')
        parts.append(
            f'<text x="{_ML - 7}" y="{_fmt(y + 4)}" font-size="11" text-anchor="end" '
            f'font-family="sans-serif">{_fmt(t)}</text>'
        )
    for k, (label, xs, ys) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        if label:
            ly = _MT + 14 + 14 * k
            parts.append(f'<line x1="{_W - 150}" y1="{ly - 4}" x2="{_W - 130}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            parts.append(
                f'<text x="{_W - 125}" y="{ly}" font-size="11" font-family="sans-serif">{label}</text>'
            )
    if title:
        parts.append(
            f'<text x="{_W / 2}" y="{_MT - 12}" font-size="13" text-anchor="middle" '
            f'font-family="sans-serif">{title}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_W / 2}" y="{_H - 10}" font-size="12" text-anchor="middle" '
            f'font-family="sans-serif">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="14" y="{_H / 2}" font-size="12" text-anchor="middle" '
            f'font-family="sans-serif" transform="rotate(-90 14 {_H / 2})">{ylabel}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
