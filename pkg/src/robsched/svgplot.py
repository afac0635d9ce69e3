"""Tiny standalone SVG emitters for box plots and scatter plots.

CSV stays the canonical artifact; these exist so correlation summaries can
be eyeballed without external plotting tools.  No dependencies, fixed
layout, text output.
"""

from __future__ import annotations

from typing import Sequence

_W, _H = 760, 420
_ML, _MR, _MT, _MB = 70, 20, 40, 70


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]


def _yscale(lo: float, hi: float):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    lo -= 0.05 * span
    hi += 0.05 * span

    def to_px(v: float) -> float:
        return _MT + (_H - _MT - _MB) * (hi - v) / (hi - lo)

    return lo, hi, to_px


def _yaxis(parts: list[str], lo: float, hi: float, to_px, label: str) -> None:
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>')
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        y = to_px(v)
        parts.append(f'<line x1="{_ML - 4}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">{_esc(label)}</text>'
    )


def box_plot_svg(groups: Sequence[tuple[str, tuple[float, float, float, float, float]]],
                 title: str = "", ylabel: str = "") -> str:
    """Box plot from (label, (min, q1, median, q3, max)) tuples."""
    if not groups:
        raise ValueError("box plot needs at least one group")
    vals = [v for _, summ in groups for v in summ]
    lo, hi, to_px = _yscale(min(vals), max(vals))
    parts = _header(title)
    _yaxis(parts, lo, hi, to_px, ylabel)
    slot = (_W - _ML - _MR) / len(groups)
    bw = min(34.0, slot * 0.5)
    for k, (label, (vmin, q1, med, q3, vmax)) in enumerate(groups):
        cx = _ML + slot * (k + 0.5)
        x0, x1 = cx - bw / 2, cx + bw / 2
        parts.append(f'<line x1="{cx:.1f}" y1="{to_px(vmin):.1f}" x2="{cx:.1f}" '
                     f'y2="{to_px(q1):.1f}" stroke="black"/>')
        parts.append(f'<line x1="{cx:.1f}" y1="{to_px(q3):.1f}" x2="{cx:.1f}" '
                     f'y2="{to_px(vmax):.1f}" stroke="black"/>')
        for v in (vmin, vmax):
            parts.append(f'<line x1="{cx - bw / 4:.1f}" y1="{to_px(v):.1f}" '
                         f'x2="{cx + bw / 4:.1f}" y2="{to_px(v):.1f}" stroke="black"/>')
        parts.append(f'<rect x="{x0:.1f}" y="{to_px(q3):.1f}" width="{bw:.1f}" '
                     f'height="{to_px(q1) - to_px(q3):.1f}" fill="#9ecae1" stroke="black"/>')
        parts.append(f'<line x1="{x0:.1f}" y1="{to_px(med):.1f}" x2="{x1:.1f}" '
                     f'y2="{to_px(med):.1f}" stroke="black" stroke-width="2"/>')
        parts.append(f'<text x="{cx:.1f}" y="{_H - _MB + 14}" text-anchor="end" '
                     f'transform="rotate(-45 {cx:.1f} {_H - _MB + 14})">{_esc(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_svg(x: Sequence[float], y: Sequence[float], title: str = "",
                xlabel: str = "", ylabel: str = "") -> str:
    """Scatter plot of two equally long series."""
    if len(x) != len(y) or not x:
        raise ValueError("scatter needs two equally long non-empty series")
    ylo, yhi, to_py = _yscale(min(y), max(y))
    xlo, xhi = min(x), max(x)
    if xhi <= xlo:
        xhi = xlo + 1.0
    span = xhi - xlo
    xlo -= 0.05 * span
    xhi += 0.05 * span

    def to_px(v: float) -> float:
        return _ML + (_W - _ML - _MR) * (v - xlo) / (xhi - xlo)

    parts = _header(title)
    _yaxis(parts, ylo, yhi, to_py, ylabel)
    parts.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>')
    for k in range(5):
        v = xlo + (xhi - xlo) * k / 4
        px = to_px(v)
        parts.append(f'<line x1="{px:.1f}" y1="{_H - _MB}" x2="{px:.1f}" '
                     f'y2="{_H - _MB + 4}" stroke="black"/>')
        parts.append(f'<text x="{px:.1f}" y="{_H - _MB + 18}" text-anchor="middle">{v:.3g}</text>')
    parts.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" '
                 f'text-anchor="middle">{_esc(xlabel)}</text>')
    for xv, yv in zip(x, y):
        parts.append(f'<circle cx="{to_px(xv):.1f}" cy="{to_py(yv):.1f}" r="2.5" '
                     f'fill="#3182bd" fill-opacity="0.65"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
