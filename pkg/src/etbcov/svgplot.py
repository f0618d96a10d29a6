"""Minimal deterministic SVG line and trajectory plots."""
import math
from html import escape

import numpy as np

WIDTH = 720
HEIGHT = 440
MARGIN = (70, 20, 40, 55)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def nice_ticks(lo, hi, count=6):
    """Round tick values covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("non-finite axis range")
    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    v = start
    while v <= hi + step * 1e-9:
        ticks.append(round(v, 12))
        v += step
    if ticks[-1] < hi:
        ticks.append(round(v, 12))
    return ticks


def _fmt_tick(v):
    if v == 0:
        return "0"
    a = abs(v)
    if a >= 1e5 or a < 1e-3:
        return f"{v:.2g}"
    return f"{v:g}"


def _num(v):
    return f"{v:.2f}"


class _Axes:
    def __init__(self, xlo, xhi, ylo, yhi, width=WIDTH, height=HEIGHT, equal=False):
        self.xt = nice_ticks(xlo, xhi)
        self.yt = nice_ticks(ylo, yhi)
        self.width = width
        self.height = height
        l, r, t, b = MARGIN
        self.box = (l, t, width - r, height - b)
        self.x0, self.x1 = self.xt[0], self.xt[-1]
        self.y0, self.y1 = self.yt[0], self.yt[-1]
        if equal:
            pw = self.box[2] - self.box[0]
            ph = self.box[3] - self.box[1]
            scale = min(pw / (self.x1 - self.x0), ph / (self.y1 - self.y0))
            self.box = (l, t, l + scale * (self.x1 - self.x0), t + scale * (self.y1 - self.y0))

    def px(self, x):
        l, _, r, _ = self.box
        return l + (x - self.x0) / (self.x1 - self.x0) * (r - l)

    def py(self, y):
        _, t, _, b = self.box
        return b - (y - self.y0) / (self.y1 - self.y0) * (b - t)

    def frame(self, title, xlabel, ylabel):
        l, t, r, b = self.box
        out = [f'<rect x="{_num(l)}" y="{_num(t)}" width="{_num(r - l)}" height="{_num(b - t)}" '
               'fill="none" stroke="#333"/>']
        for x in self.xt:
            X = self.px(x)
            out.append(f'<line x1="{_num(X)}" y1="{_num(b)}" x2="{_num(X)}" y2="{_num(b + 5)}" stroke="#333"/>')
            out.append(f'<text x="{_num(X)}" y="{_num(b + 18)}" text-anchor="middle">{_fmt_tick(x)}</text>')
        for y in self.yt:
            Y = self.py(y)
            out.append(f'<line x1="{_num(l - 5)}" y1="{_num(Y)}" x2="{_num(l)}" y2="{_num(Y)}" stroke="#333"/>')
            out.append(f'<text x="{_num(l - 8)}" y="{_num(Y + 4)}" text-anchor="end">{_fmt_tick(y)}</text>')
        out.append(f'<text x="{_num((l + r) / 2)}" y="{_num(t - 12)}" text-anchor="middle" '
                   f'font-size="14">{escape(title)}</text>')
        out.append(f'<text x="{_num((l + r) / 2)}" y="{_num(b + 36)}" text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="16" y="{_num((t + b) / 2)}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {_num((t + b) / 2)})">{escape(ylabel)}</text>')
        return out

    def legend(self, labels):
        l, t, _, _ = self.box
        out = []
        for k, lab in enumerate(labels):
            y = t + 14 + 16 * k
            c = PALETTE[k % len(PALETTE)]
            out.append(f'<line x1="{_num(l + 10)}" y1="{_num(y)}" x2="{_num(l + 30)}" y2="{_num(y)}" '
                       f'stroke="{c}" stroke-width="2"/>')
            out.append(f'<text x="{_num(l + 36)}" y="{_num(y + 4)}">{escape(lab)}</text>')
        return out


def _document(width, height, body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def _compress_steps(x, y):
    """Vertices of a step plot, keeping only points where the value changes."""
    keep = [0]
    for k in range(1, len(y)):
        if y[k] != y[k - 1]:
            if keep[-1] != k - 1:
                keep.append(k - 1)
            keep.append(k)
    if keep[-1] != len(y) - 1:
        keep.append(len(y) - 1)
    return x[keep], y[keep]


def line_plot(series, path, title="", xlabel="", ylabel="", step=False):
    """Overlay ``series`` = [(label, x, y), ...] on one set of axes."""
    series = [(lab, np.asarray(x, float), np.asarray(y, float)) for lab, x, y in series]
    series = [(lab, x, y) for lab, x, y in series if len(x)]
    if not series:
        raise ValueError("nothing to plot")
    xs = np.concatenate([x for _, x, _ in series])
    ys = np.concatenate([y for _, _, y in series])
    ax = _Axes(float(xs.min()), float(xs.max()), min(float(ys.min()), 0.0), float(ys.max()))
    body = ax.frame(title, xlabel, ylabel)
    for k, (lab, x, y) in enumerate(series):
        if step:
            x, y = _compress_steps(x, y)
        c = PALETTE[k % len(PALETTE)]
        if len(x) == 1:
            body.append(f'<circle cx="{_num(ax.px(x[0]))}" cy="{_num(ax.py(y[0]))}" r="3" fill="{c}"/>')
            continue
        pts = " ".join(f"{_num(ax.px(a))},{_num(ax.py(b))}" for a, b in zip(x, y))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
    body += ax.legend([lab for lab, _, _ in series])
    with open(path, "w", newline="\n") as fh:
        fh.write(_document(ax.width, ax.height, body))


def trajectory_plot(Q, positions, path, title="trajectories"):
    """Domain outline, paths, start markers (squares) and end markers (discs)."""
    Q = np.asarray(Q, float)
    P = np.asarray(positions, float)
    ax = _Axes(float(Q[:, 0].min()), float(Q[:, 0].max()), float(Q[:, 1].min()), float(Q[:, 1].max()),
               width=560, height=560, equal=True)
    body = ax.frame(title, "x [m]", "y [m]")
    outline = " ".join(f"{_num(ax.px(x))},{_num(ax.py(y))}" for x, y in Q)
    body.append(f'<polygon points="{outline}" fill="none" stroke="#999" stroke-dasharray="4 3"/>')
    for i in range(P.shape[1]):
        c = PALETTE[i % len(PALETTE)]
        path_i = P[:, i]
        # drop repeated points so stationary stretches cost nothing
        keep = np.ones(len(path_i), dtype=bool)
        keep[1:] = np.any(path_i[1:] != path_i[:-1], axis=1)
        pts = path_i[keep]
        if len(pts) > 1:
            s = " ".join(f"{_num(ax.px(x))},{_num(ax.py(y))}" for x, y in pts)
            body.append(f'<polyline points="{s}" fill="none" stroke="{c}" stroke-width="1.2"/>')
        sx, sy = ax.px(path_i[0, 0]), ax.py(path_i[0, 1])
        body.append(f'<rect x="{_num(sx - 3)}" y="{_num(sy - 3)}" width="6" height="6" fill="none" stroke="{c}"/>')
        ex, ey = ax.px(path_i[-1, 0]), ax.py(path_i[-1, 1])
        body.append(f'<circle cx="{_num(ex)}" cy="{_num(ey)}" r="3.5" fill="{c}"/>')
        body.append(f'<text x="{_num(ex + 5)}" y="{_num(ey - 5)}">{i}</text>')
    with open(path, "w", newline="\n") as fh:
        fh.write(_document(ax.width, ax.height, body))
