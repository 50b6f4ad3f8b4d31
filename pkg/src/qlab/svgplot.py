"""Minimal self-contained SVG plots (no plotting dependency).

Static figures only: log-log scatter with a fitted line, ball covers
colored by case, and 1D profiles.  Output is deterministic for fixed
input and always well under 1 MB.
"""

from __future__ import annotations

import math

W, H = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50

CASE_COLORS = {1: "#4477aa", 2: "#ee6677", 3: "#228833", 4: "#ccbb44"}


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _header(title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]


def _axes_frame(parts: list, xlabel: str, ylabel: str):
    x0, y0 = MARGIN_L, H - MARGIN_B
    x1, y1 = W - MARGIN_R, MARGIN_T
    parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
                 f'fill="none" stroke="black" stroke-width="1"/>')
    parts.append(f'<text x="{(x0 + x1) / 2}" y="{H - 12}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13">{xlabel}</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13" '
                 f'transform="rotate(-90 18 {(y0 + y1) / 2})">{ylabel}</text>')


class _LogMap:
    def __init__(self, vals, lo_px, hi_px, pad=0.06):
        logs = [math.log10(v) for v in vals if v > 0]
        lo, hi = min(logs), max(logs)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        span = hi - lo
        self.lo, self.hi = lo - pad * span, hi + pad * span
        self.lo_px, self.hi_px = lo_px, hi_px

    def __call__(self, v):
        t = (math.log10(v) - self.lo) / (self.hi - self.lo)
        return self.lo_px + t * (self.hi_px - self.lo_px)

    def decades(self):
        return range(math.ceil(self.lo), math.floor(self.hi) + 1)


def scaling_plot_svg(points, fit=None, title="scaling",
                     xlabel="h", ylabel="sup norm") -> str:
    """Log-log scatter of (x, y) pairs, optionally with a fitted line
    given as (slope, intercept) for log10 y = slope * log10 x + intercept."""
    pts = [(x, y) for x, y in points if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing to plot")
    parts = _header(title)
    xmap = _LogMap([p[0] for p in pts], MARGIN_L, W - MARGIN_R)
    ymap = _LogMap([p[1] for p in pts], H - MARGIN_B, MARGIN_T)
    for d in xmap.decades():
        px = xmap(10.0 ** d)
        parts.append(f'<line x1="{_fmt(px)}" y1="{MARGIN_T}" x2="{_fmt(px)}" '
                     f'y2="{H - MARGIN_B}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{H - MARGIN_B + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">1e{d}</text>')
    for d in ymap.decades():
        py = ymap(10.0 ** d)
        parts.append(f'<line x1="{MARGIN_L}" y1="{_fmt(py)}" x2="{W - MARGIN_R}" '
                     f'y2="{_fmt(py)}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(py + 4)}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">1e{d}</text>')
    if fit is not None:
        slope, intercept = fit
        xs = sorted(p[0] for p in pts)
        seg = []
        for x in (xs[0], xs[-1]):
            y = 10.0 ** (slope * math.log10(x) + intercept)
            seg.append((xmap(x), ymap(y)))
        parts.append(f'<line x1="{_fmt(seg[0][0])}" y1="{_fmt(seg[0][1])}" '
                     f'x2="{_fmt(seg[1][0])}" y2="{_fmt(seg[1][1])}" '
                     f'stroke="#ee6677" stroke-width="1.5"/>')
    for x, y in pts:
        parts.append(f'<circle cx="{_fmt(xmap(x))}" cy="{_fmt(ymap(y))}" r="4" '
                     f'fill="#4477aa" fill-opacity="0.85"/>')
    _axes_frame(parts, xlabel, ylabel)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cover_plot_svg(decisions, title="ball cover by case") -> str:
    """Unit-ball cover: one circle per decision, colored by case id."""
    parts = _header(title)
    cx, cy = W / 2, (H + MARGIN_T - MARGIN_B) / 2 + 10
    scale = (min(W - MARGIN_L - MARGIN_R, H - MARGIN_T - MARGIN_B) / 2) * 0.95
    parts.append(f'<circle cx="{cx}" cy="{cy}" r="{_fmt(scale)}" fill="none" '
                 f'stroke="black" stroke-width="1.5"/>')
    for dec in decisions:
        px = cx + dec.center[0] * scale
        py = cy - dec.center[1] * scale
        pr = max(dec.radius * scale, 0.6)
        color = CASE_COLORS.get(dec.case_id, "#999999")
        parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(pr)}" '
                     f'fill="{color}" fill-opacity="0.25" stroke="{color}" '
                     f'stroke-width="0.5"/>')
    for cid, color in CASE_COLORS.items():
        y = MARGIN_T + 18 * cid
        parts.append(f'<rect x="{W - 130}" y="{y - 10}" width="12" height="12" '
                     f'fill="{color}" fill-opacity="0.5"/>')
        parts.append(f'<text x="{W - 112}" y="{y}" font-family="sans-serif" '
                     f'font-size="12">case {cid}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def profile_plot_svg(series, title="axis profiles", xlabel="x",
                     ylabel="|u|") -> str:
    """Line plot of (x, y, label) triples on linear axes."""
    parts = _header(title)
    xs = [x for s in series for x in s[0]]
    ys = [y for s in series for y in s[1]]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if y_hi - y_lo < 1e-300:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (W - MARGIN_L - MARGIN_R)

    def py(y):
        return H - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (H - MARGIN_T - MARGIN_B)

    colors = ["#4477aa", "#ee6677", "#228833", "#ccbb44"]
    for i, (x, y, label) in enumerate(series):
        step = max(1, len(x) // 1200)
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}"
                       for a, b in list(zip(x, y))[::step])
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.2"/>')
        parts.append(f'<text x="{W - MARGIN_R - 10}" y="{MARGIN_T + 16 + 14 * i}" '
                     f'text-anchor="end" font-family="sans-serif" font-size="12" '
                     f'fill="{color}">{label}</text>')
    _axes_frame(parts, xlabel, ylabel)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
