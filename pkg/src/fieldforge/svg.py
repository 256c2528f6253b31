"""Minimal self-rendered SVG charts: line plots, heatmaps, polar cuts, bars.

Output is deterministic text (fixed float formatting, no timestamps).
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 420
MARGIN = (70, 20, 30, 50)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _doc(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>',
                      f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
                      *body, "</svg>", ""])


def line_plot(x, series: dict[str, np.ndarray], title: str = "", xlabel: str = "", ylabel: str = "",
              hline: float | None = None) -> str:
    """Line chart of one or more named series over a shared ``x``."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] + [np.zeros(0)])
    y0, y1 = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hline is not None:
        y0, y1 = min(y0, hline), max(y1, hline)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    x0, x1 = float(x.min()), float(x.max()) if x.max() > x.min() else float(x.min()) + 1
    l, r, t, b = MARGIN
    pw, ph = W - l - r, H - t - b

    def px(v):
        return l + (v - x0) / (x1 - x0) * pw

    def py(v):
        return t + (y1 - v) / (y1 - y0) * ph

    body = [f'<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for tv in _nice_ticks(x0, x1):
        body.append(f'<line x1="{_f(px(tv))}" y1="{t + ph}" x2="{_f(px(tv))}" y2="{t + ph + 5}" stroke="black"/>')
        body.append(f'<text x="{_f(px(tv))}" y="{t + ph + 18}" text-anchor="middle">{tv:g}</text>')
    for tv in _nice_ticks(y0, y1):
        body.append(f'<line x1="{l - 5}" y1="{_f(py(tv))}" x2="{l}" y2="{_f(py(tv))}" stroke="black"/>')
        body.append(f'<text x="{l - 8}" y="{_f(py(tv) + 4)}" text-anchor="end">{tv:g}</text>')
    if hline is not None:
        body.append(f'<line x1="{l}" y1="{_f(py(hline))}" x2="{l + pw}" y2="{_f(py(hline))}" '
                    'stroke="gray" stroke-dasharray="4 3"/>')
    for i, (name, y) in enumerate(ys.items()):
        pts = " ".join(f"{_f(px(a))},{_f(py(v))}" for a, v in zip(x, y) if math.isfinite(v))
        col = PALETTE[i % len(PALETTE)]
        body.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        body.append(f'<text x="{l + 10}" y="{t + 16 + 14 * i}" fill="{col}">{escape(name)}</text>')
    body.append(f'<text x="{l + pw / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    body.append(f'<text x="16" y="{t + ph / 2}" text-anchor="middle" '
                f'transform="rotate(-90 16 {t + ph / 2})">{escape(ylabel)}</text>')
    return _doc(body, title)


def _color(v: float) -> str:
    # blue-white-red diverging map on [0, 1]
    v = min(1.0, max(0.0, v))
    if v < 0.5:
        s = v / 0.5
        rgb = (int(40 + 215 * s), int(80 + 175 * s), 255)
    else:
        s = (v - 0.5) / 0.5
        rgb = (255, int(255 - 175 * s), int(255 - 215 * s))
    return "#%02x%02x%02x" % rgb


def heatmap(data: np.ndarray, u_edges=None, v_edges=None, title: str = "", symmetric: bool = True) -> str:
    """Cell-wise heatmap of ``data[iu, iv]`` with ``u`` across and ``v`` up."""
    d = np.asarray(data, dtype=float)
    nu, nv = d.shape
    u_edges = np.arange(nu + 1.0) if u_edges is None else np.asarray(u_edges, dtype=float)
    v_edges = np.arange(nv + 1.0) if v_edges is None else np.asarray(v_edges, dtype=float)
    m = float(np.nanmax(np.abs(d))) if d.size else 0.0
    if symmetric:
        lo, hi = -m, m
    else:
        lo, hi = float(np.nanmin(d)), float(np.nanmax(d))
    span = hi - lo if hi > lo else 1.0
    l, r, t, b = MARGIN
    pw, ph = W - l - r, H - t - b
    u0, u1, v0, v1 = u_edges[0], u_edges[-1], v_edges[0], v_edges[-1]
    body = []
    for i in range(nu):
        xa = l + (u_edges[i] - u0) / (u1 - u0) * pw
        xb = l + (u_edges[i + 1] - u0) / (u1 - u0) * pw
        for j in range(nv):
            ya = t + (v1 - v_edges[j + 1]) / (v1 - v0) * ph
            yb = t + (v1 - v_edges[j]) / (v1 - v0) * ph
            body.append(f'<rect x="{_f(xa)}" y="{_f(ya)}" width="{_f(xb - xa + 0.3)}" height="{_f(yb - ya + 0.3)}" '
                        f'fill="{_color((d[i, j] - lo) / span if math.isfinite(d[i, j]) else 0.5)}"/>')
    body.append(f'<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    body.append(f'<text x="{l}" y="{H - 15}">range [{lo:.3g}, {hi:.3g}]</text>')
    return _doc(body, title)


def polar_cut(angles_rad, values_db, title: str = "", floor_db: float = -30.0) -> str:
    """Polar plot of a gain cut in dB, clipped at ``floor_db`` below the peak."""
    a = np.asarray(angles_rad, dtype=float)
    v = np.asarray(values_db, dtype=float)
    top = float(np.nanmax(v))
    r = np.clip((v - (top + floor_db)) / -floor_db, 0, 1)
    cx, cy, rad = W / 2, H / 2 + 10, min(W, H) / 2 - 40
    body = []
    for frac in (0.25, 0.5, 0.75, 1.0):
        body.append(f'<circle cx="{cx}" cy="{cy}" r="{_f(rad * frac)}" fill="none" stroke="#ccc"/>')
        body.append(f'<text x="{_f(cx + 3)}" y="{_f(cy - rad * frac + 12)}" fill="#888">'
                    f'{top + floor_db * (1 - frac):.1f}</text>')
    pts = " ".join(f"{_f(cx + rad * ri * math.sin(ai))},{_f(cy - rad * ri * math.cos(ai))}" for ai, ri in zip(a, r))
    body.append(f'<polygon fill="none" stroke="{PALETTE[0]}" stroke-width="1.5" points="{pts}"/>')
    body.append(f'<text x="10" y="{H - 10}">peak {top:.2f} dBi</text>')
    return _doc(body, title)


def bar_chart(edges, counts, title: str = "", xlabel: str = "", ylabel: str = "count") -> str:
    e = np.asarray(edges, dtype=float)
    c = np.asarray(counts, dtype=float)
    l, r, t, b = MARGIN
    pw, ph = W - l - r, H - t - b
    cmax = float(c.max()) if c.size and c.max() > 0 else 1.0
    body = [f'<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for i, v in enumerate(c):
        xa = l + (e[i] - e[0]) / (e[-1] - e[0]) * pw
        xb = l + (e[i + 1] - e[0]) / (e[-1] - e[0]) * pw
        hgt = v / cmax * ph
        body.append(f'<rect x="{_f(xa)}" y="{_f(t + ph - hgt)}" width="{_f(max(xb - xa - 1, 0.5))}" '
                    f'height="{_f(hgt)}" fill="{PALETTE[0]}"/>')
    for tv in _nice_ticks(e[0], e[-1]):
        x = l + (tv - e[0]) / (e[-1] - e[0]) * pw
        body.append(f'<text x="{_f(x)}" y="{t + ph + 18}" text-anchor="middle">{tv:g}</text>')
    for tv in _nice_ticks(0, cmax):
        y = t + ph - tv / cmax * ph
        body.append(f'<text x="{l - 8}" y="{_f(y + 4)}" text-anchor="end">{tv:g}</text>')
    body.append(f'<text x="{l + pw / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    body.append(f'<text x="16" y="{t + ph / 2}" text-anchor="middle" '
                f'transform="rotate(-90 16 {t + ph / 2})">{escape(ylabel)}</text>')
    return _doc(body, title)
