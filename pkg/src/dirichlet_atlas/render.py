"""Deterministic SVG rendering of an atlas document."""

from __future__ import annotations

import math

import numpy as np

from . import errors

# colour convention: 1/2 sign of Re f on pre-images of f, 3/4 sign of Re f' on pre-images of f'
COLORS = {1: "#c0392b", 2: "#2471a3", 3: "#1e8449", 4: "#d68910"}
CIRCLE_COLOR = "#555555"
LAYERS = ("domains", "real", "circles", "eta", "zeros", "branch")
SIZE = 900
MARGIN = 48


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    def __init__(self, box):
        x0, x1, y0, y1 = box
        self.box = box
        self.scale = (SIZE - 2 * MARGIN) / max(x1 - x0, y1 - y0)
        self.w = (x1 - x0) * self.scale + 2 * MARGIN
        self.h = (y1 - y0) * self.scale + 2 * MARGIN

    def xy(self, s):
        s = np.asarray(s, dtype=complex)
        x = MARGIN + (s.real - self.box[0]) * self.scale
        y = self.h - MARGIN - (s.imag - self.box[2]) * self.scale
        return x, y

    def path(self, pts) -> str:
        x, y = self.xy(pts)
        return "M" + " L".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y))


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list:
    span = hi - lo
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    return [round(first + i * step, 10) for i in range(int((hi - first) / step + 1e-9) + 1)]


def _axes(fr: _Frame) -> list:
    x0, x1, y0, y1 = fr.box
    out = [f'<rect x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" width="{_fmt(fr.w - 2 * MARGIN)}" '
           f'height="{_fmt(fr.h - 2 * MARGIN)}" fill="none" stroke="#000" stroke-width="1"/>']
    for v in _nice_ticks(x0, x1):
        x, _ = fr.xy(complex(v, y0))
        out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(fr.h - MARGIN)}" x2="{_fmt(x)}" y2="{_fmt(fr.h - MARGIN + 5)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(fr.h - MARGIN + 18)}" font-size="11" text-anchor="middle">{v:g}</text>')
    for v in _nice_ticks(y0, y1):
        _, y = fr.xy(complex(x0, v))
        out.append(f'<line x1="{_fmt(MARGIN - 5)}" y1="{_fmt(y)}" x2="{_fmt(MARGIN)}" y2="{_fmt(y)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(MARGIN - 8)}" y="{_fmt(y + 4)}" font-size="11" text-anchor="end">{v:g}</text>')
    out.append(f'<text x="{_fmt(fr.w / 2)}" y="{_fmt(fr.h - 8)}" font-size="12" text-anchor="middle">Re s</text>')
    out.append(f'<text x="12" y="{_fmt(fr.h / 2)}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 12 {_fmt(fr.h / 2)})">Im s</text>')
    return out


def _runs(c):
    """(points, colour) pieces of a real-axis pre-image from its colour runs."""
    if not c.color_runs:
        return [(c.points, None)]
    starts = [r[0] for r in c.color_runs] + [c.points.size - 1]
    return [(c.points[a: b + 1], col) for (a, col), b in zip(c.color_runs, starts[1:])]


def render_svg(doc, layers=None, path=None) -> str:
    """SVG text for the requested layers (all available by default); writes it when ``path`` is given."""
    requested = tuple(layers) if layers else None
    have = {"domains": bool(doc.domains), "eta": bool(doc.eta_arcs), "zeros": bool(doc.zeros),
            "branch": any(z.target == "f-prime" for z in doc.zeros),
            "real": any(c.levelset.kind == "ImZero" for c in doc.curves),
            "circles": any(c.levelset.kind == "AbsEq" for c in doc.curves)}
    if requested:
        for name in requested:
            if name not in have:
                raise errors.MissingLayer(f"unknown layer {name!r}")
            if not have[name]:
                raise errors.MissingLayer(f"document has no {name!r} layer")
    use = requested or tuple(n for n in LAYERS if have[n])
    if doc.window:
        w = doc.window
        box = (w["sigma_min"], w["sigma_max"], w["t_min"], w["t_max"])
    else:
        box = (-1.0, 1.0, -1.0, 1.0)
    fr = _Frame(box)
    body = []
    clip = (f'<clipPath id="win"><rect x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" '
            f'width="{_fmt(fr.w - 2 * MARGIN)}" height="{_fmt(fr.h - 2 * MARGIN)}"/></clipPath>')
    for name in LAYERS:
        if name not in use:
            continue
        g = [f'<g id="{name}" clip-path="url(#win)">']
        if name == "domains":
            for i, d in enumerate(doc.domains):
                xy = np.asarray(d.polygon.exterior.coords)
                fill = ("#f5b7b1", "#aed6f1", "#abebc6", "#f9e79f")[i % 4]
                g.append(f'<path d="{fr.path(xy[:, 0] + 1j * xy[:, 1])} Z" fill="{fill}" fill-opacity="0.5" stroke="none"/>')
        elif name == "real":
            for c in (c for c in doc.curves if c.levelset.kind == "ImZero"):
                width = "1.6" if c.source == "f" else "1.0"
                dash = "" if c.source == "f" else ' stroke-dasharray="5,2"'
                for pts, col in _runs(c):
                    color = COLORS.get(col, "#000")
                    g.append(f'<path d="{fr.path(pts)}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>')
        elif name == "circles":
            for c in (c for c in doc.curves if c.levelset.kind == "AbsEq"):
                pts = np.append(c.points, c.points[:1]) if c.closed else c.points
                g.append(f'<path d="{fr.path(pts)}" fill="none" stroke="{CIRCLE_COLOR}" stroke-width="0.7"/>')
        elif name == "eta":
            for a in doc.eta_arcs:
                g.append(f'<path d="{fr.path(a.points)}" fill="none" stroke="#000" stroke-width="1.2" '
                         f'stroke-dasharray="6,3"/>')
        elif name == "zeros":
            for z in (z for z in doc.zeros if z.target == "f"):
                x, y = fr.xy(z.location)
                g.append(f'<circle cx="{_fmt(float(x))}" cy="{_fmt(float(y))}" r="{2.5 * z.order + 1:.1f}" fill="#000"/>')
        elif name == "branch":
            for z in (z for z in doc.zeros if z.target == "f-prime"):
                x, y = fr.xy(z.location)
                x, y = float(x), float(y)
                g.append(f'<path d="M{_fmt(x - 4)},{_fmt(y - 4)} L{_fmt(x + 4)},{_fmt(y + 4)} '
                         f'M{_fmt(x - 4)},{_fmt(y + 4)} L{_fmt(x + 4)},{_fmt(y - 4)}" stroke="#000" stroke-width="1.5"/>')
        g.append("</g>")
        body.extend(g)
    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(fr.w)}" height="{_fmt(fr.h)}" '
           f'viewBox="0 0 {_fmt(fr.w)} {_fmt(fr.h)}" font-family="sans-serif">',
           f'<defs>{clip}</defs>', f'<rect width="100%" height="100%" fill="#fff"/>'] + body + _axes(fr) + ["</svg>"]
    text = "\n".join(svg) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
