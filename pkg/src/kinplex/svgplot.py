"""Deterministic standalone SVG plots for scan and instability reports.

Three kinds: a workspace scatter (planar ambient image of the config grid),
a singular-scan cell map, and a 2D slice of an instability report.  Output
bytes depend only on the input data: fixed canvas, fixed tick count, %.6g
coordinate formatting, no timestamps.
"""

from __future__ import annotations

import numpy as np

from .charts import Chart, Circle
from .errors import PreconditionError
from .kinematics import KinematicMap, SingularScanReport
from .validation import InstabilityReport

__all__ = [
    "render_workspace",
    "render_singular_scan",
    "render_instability_slice",
]

WIDTH, HEIGHT = 640, 520
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 34, 54


def _fmt(x: float) -> str:
    # normalize negative zero so equal plots are equal bytes
    v = float(x)
    if v == 0.0:
        v = 0.0
    return f"{v:.6g}"


class _Frame:
    """Maps data coordinates to SVG pixels (y axis flipped)."""

    def __init__(self, xlo, xhi, ylo, yhi):
        self.xlo, self.xhi = float(xlo), float(xhi)
        self.ylo, self.yhi = float(ylo), float(yhi)
        self.px_w = WIDTH - MARGIN_L - MARGIN_R
        self.px_h = HEIGHT - MARGIN_T - MARGIN_B

    def x(self, v):
        t = (v - self.xlo) / (self.xhi - self.xlo)
        return MARGIN_L + t * self.px_w

    def y(self, v):
        t = (v - self.ylo) / (self.yhi - self.ylo)
        return MARGIN_T + (1.0 - t) * self.px_h


def _axes(frame: _Frame, xlabel: str, ylabel: str, title: str) -> list:
    out = []
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = MARGIN_T, HEIGHT - MARGIN_B
    out.append(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
               'fill="none" stroke="#222" stroke-width="1"/>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{MARGIN_T - 12}" '
               'text-anchor="middle" font-size="14">' + title + "</text>")
    for i in range(5):
        t = i / 4.0
        vx = frame.xlo + t * (frame.xhi - frame.xlo)
        px = frame.x(vx)
        out.append(f'<line x1="{_fmt(px)}" y1="{y1}" x2="{_fmt(px)}" y2="{y1 + 5}" '
                   'stroke="#222" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(px)}" y="{y1 + 20}" text-anchor="middle" '
                   f'font-size="11">{_fmt(vx)}</text>')
        vy = frame.ylo + t * (frame.yhi - frame.ylo)
        py = frame.y(vy)
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" '
                   'stroke="#222" stroke-width="1"/>')
        out.append(f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
                   f'font-size="11">{_fmt(vy)}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 14}" text-anchor="middle" '
               f'font-size="12">{xlabel}</text>')
    out.append(f'<text x="18" y="{(y0 + y1) // 2}" text-anchor="middle" '
               f'font-size="12" transform="rotate(-90 18 {(y0 + y1) // 2})">'
               f'{ylabel}</text>')
    return out


def _document(body: list) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        '<g font-family="Helvetica, Arial, sans-serif" fill="#222">',
    ]
    tail = ["</g>", "</svg>", ""]
    return "\n".join(head + body + tail)


def render_workspace(k: KinematicMap, out_path: str, grid: int = 40) -> str:
    """Scatter of the ambient workspace image of an n-per-axis config grid."""
    qs = k.config_chart.grid_points(grid)
    pts = k.ambient_many(qs)
    if pts.shape[1] != 2:
        raise PreconditionError(
            f"workspace plot needs a planar ambient image, got {pts.shape[1]} "
            "coordinates")
    xlo, xhi = float(pts[:, 0].min()), float(pts[:, 0].max())
    ylo, yhi = float(pts[:, 1].min()), float(pts[:, 1].max())
    pad_x = 0.05 * (xhi - xlo or 1.0)
    pad_y = 0.05 * (yhi - ylo or 1.0)
    frame = _Frame(xlo - pad_x, xhi + pad_x, ylo - pad_y, yhi + pad_y)
    body = _axes(frame, "x", "y", f"workspace of {k.name}")
    dots = []
    for p in pts:
        dots.append(f'<circle cx="{_fmt(frame.x(p[0]))}" cy="{_fmt(frame.y(p[1]))}" '
                    'r="1.6" fill="#1f5fa8" fill-opacity="0.5"/>')
    text = _document(dots + body)
    with open(out_path, "w", newline="\n") as fh:
        fh.write(text)
    return (f"workspace {k.name}: {pts.shape[0]} samples, "
            f"x [{_fmt(xlo)}, {_fmt(xhi)}], y [{_fmt(ylo)}, {_fmt(yhi)}] "
            f"-> {out_path}")


def render_singular_scan(report: SingularScanReport, out_path: str,
                         title: str = "singular scan") -> str:
    """Cell map of a 2-axis scan; flagged cells shaded.  The first config
    coordinate runs up the vertical axis, so its level sets are horizontal
    bands."""
    if len(report.grid) != 2:
        raise PreconditionError(
            f"scan plot needs a 2-axis scan, got {len(report.grid)} axes")
    a0, a1 = report.centers
    h0 = float(a0[1] - a0[0]) if len(a0) > 1 else 1.0
    h1 = float(a1[1] - a1[0]) if len(a1) > 1 else 1.0
    frame = _Frame(a1[0] - h1 / 2, a1[-1] + h1 / 2, a0[0] - h0 / 2, a0[-1] + h0 / 2)
    body = _axes(frame, "q1", "q0", title)
    cells = []
    flagged = report.flagged
    for i in range(flagged.shape[0]):
        for j in range(flagged.shape[1]):
            if not flagged[i, j]:
                continue
            x = frame.x(a1[j] - h1 / 2)
            y = frame.y(a0[i] + h0 / 2)
            w = frame.x(a1[j] + h1 / 2) - x
            h = frame.y(a0[i] - h0 / 2) - y
            cells.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
                         f'height="{_fmt(h)}" fill="#c0392b"/>')
    note = (f'<text x="{MARGIN_L}" y="{HEIGHT - 34}" font-size="11">'
            f'{int(flagged.sum())} singular cells of {flagged.size} '
            f'(tol {_fmt(report.tol)})</text>')
    text = _document(cells + body + [note])
    with open(out_path, "w", newline="\n") as fh:
        fh.write(text)
    return (f"singular-scan plot: {int(flagged.sum())} flagged cells "
            f"-> {out_path}")


def _axis_label_columns(report: InstabilityReport):
    cs, ws = report.points
    labels = [f"c{i}" for i in range(cs.shape[1])] \
        + [f"w{i}" for i in range(ws.shape[1])]
    data = np.concatenate([cs, ws], axis=1)
    return labels, data


def render_instability_slice(report: InstabilityReport, out_path: str,
                             axes: tuple = ("c0", "w0")) -> str:
    """2D slice of per-sample instability orders, darker cells = higher
    order.  The remaining coordinates are fixed at the max-order witness."""
    labels, data = _axis_label_columns(report)
    if len(axes) != 2 or axes[0] == axes[1]:
        raise PreconditionError("the slice needs two distinct axis names")
    try:
        ax = [labels.index(a) for a in axes]
    except ValueError:
        raise PreconditionError(
            f"unknown axis in {axes!r}; available: {', '.join(labels)}")
    fixed = [i for i in range(len(labels)) if i not in ax]
    anchor = np.concatenate([np.atleast_1d(p) for p in report.witness])
    sel = np.ones(data.shape[0], dtype=bool)
    for i in fixed:
        sel &= data[:, i] == anchor[i]
    if not np.any(sel):
        raise PreconditionError("no grid samples on the witness slice")

    xs = data[sel, ax[0]]
    ys = data[sel, ax[1]]
    orders = report.orders[sel]
    ux, uy = np.unique(xs), np.unique(ys)
    hx = float(np.min(np.diff(ux))) if ux.size > 1 else 1.0
    hy = float(np.min(np.diff(uy))) if uy.size > 1 else 1.0
    frame = _Frame(ux[0] - hx / 2, ux[-1] + hx / 2, uy[0] - hy / 2, uy[-1] + hy / 2)
    fixed_note = ", ".join(f"{labels[i]}={_fmt(anchor[i])}" for i in fixed)
    title = f"instability order: {report.plan_name}"
    body = _axes(frame, axes[0], axes[1], title)

    top = max(report.max_order, 1)
    cells = []
    for x, y, o in zip(xs, ys, orders):
        shade = int(o) / top
        gray = int(round(235 - 190 * shade))
        cells.append(
            f'<rect x="{_fmt(frame.x(x - hx / 2))}" y="{_fmt(frame.y(y + hy / 2))}" '
            f'width="{_fmt(frame.x(x + hx / 2) - frame.x(x - hx / 2))}" '
            f'height="{_fmt(frame.y(y - hy / 2) - frame.y(y + hy / 2))}" '
            f'fill="rgb({gray},{gray},{gray})"/>')
    notes = [f'<text x="{MARGIN_L}" y="{HEIGHT - 34}" font-size="11">'
             f'max order {report.max_order}, eps {_fmt(report.eps)}'
             + (f", fixed: {fixed_note}" if fixed else "") + "</text>"]
    text = _document(cells + body + notes)
    with open(out_path, "w", newline="\n") as fh:
        fh.write(text)
    return (f"instability-slice plot: {int(sel.sum())} cells, "
            f"max order {report.max_order} -> {out_path}")
