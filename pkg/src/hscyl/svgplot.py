"""Minimal standalone SVG line plots (no plotting dependency).

Only what the command-line `plot` subcommand needs: one or more (x, y)
series, optional log scaling per axis, ticks and a small legend.  Output
is a plain-text vector file.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterDomainError

__all__ = ["render_line_plot"]

_WIDTH, _HEIGHT = 720, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 34, 50
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0**e for e in range(lo_e, hi_e + 1) if lo <= 10.0**e <= hi]
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** math.floor(math.log10(span / 4))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(t)
        t += step
    return out


def render_line_plot(series, path, *, log_x: bool = False, log_y: bool = False,
                     title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Write an SVG plot of ``series`` = [(x, y, label), ...] to ``path``."""
    if not series:
        raise ParameterDomainError("nothing to plot")
    cleaned = []
    for x, y, label in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if log_x:
            keep &= x > 0
        if log_y:
            keep &= y > 0
        if np.count_nonzero(keep) < 2:
            raise ParameterDomainError(f"series {label!r} has fewer than 2 plottable points")
        cleaned.append((x[keep], y[keep], label))

    all_x = np.concatenate([c[0] for c in cleaned])
    all_y = np.concatenate([c[1] for c in cleaned])
    x_lo, x_hi = float(all_x.min()), float(all_x.max())
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def to_px(x, y):
        if log_x:
            fx = (np.log10(x) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        else:
            fx = (x - x_lo) / (x_hi - x_lo)
        if log_y:
            fy = (np.log10(y) - math.log10(y_lo)) / (math.log10(y_hi) - math.log10(y_lo))
        else:
            fy = (y - y_lo) / (y_hi - y_lo)
        px = _MARGIN_L + fx * (_WIDTH - _MARGIN_L - _MARGIN_R)
        py = _HEIGHT - _MARGIN_B - fy * (_HEIGHT - _MARGIN_T - _MARGIN_B)
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{_WIDTH - _MARGIN_L - _MARGIN_R}" '
        f'height="{_HEIGHT - _MARGIN_T - _MARGIN_B}" fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{_WIDTH / 2}" y="20" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    for tx in _ticks(x_lo, x_hi, log_x):
        px, _ = to_px(tx, y_lo)
        parts.append(f'<line x1="{px:.1f}" y1="{_HEIGHT - _MARGIN_B}" x2="{px:.1f}" '
                     f'y2="{_HEIGHT - _MARGIN_B + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.1f}" y="{_HEIGHT - _MARGIN_B + 18}" '
                     f'text-anchor="middle" font-size="11">{tx:.4g}</text>')
    for ty in _ticks(y_lo, y_hi, log_y):
        _, py = to_px(x_lo, ty)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{py:.1f}" x2="{_MARGIN_L}" '
                     f'y2="{py:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{py + 4:.1f}" text-anchor="end" '
                     f'font-size="11">{ty:.4g}</text>')
    if xlabel:
        parts.append(f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 12}" text-anchor="middle" '
                     f'font-size="12">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{_HEIGHT / 2}" text-anchor="middle" font-size="12" '
                     f'transform="rotate(-90 16 {_HEIGHT / 2})">{ylabel}</text>')
    for idx, (x, y, label) in enumerate(cleaned):
        color = _PALETTE[idx % len(_PALETTE)]
        px, py = to_px(x, y)
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        if label:
            ly = _MARGIN_T + 16 + 16 * idx
            parts.append(f'<line x1="{_WIDTH - 180}" y1="{ly - 4}" x2="{_WIDTH - 156}" '
                         f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_WIDTH - 150}" y="{ly}" font-size="11">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts) + "\n")
