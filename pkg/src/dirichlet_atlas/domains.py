"""Partition of a strip into fundamental domains and numerical checks of their bijectivity.

Inside a strip S_k the pre-image of the half line [1, +inf) consists of the
two boundary curves Gamma' and one ray on every Gamma_{k,j}, j != 0, running
from its point u with f(u) = 1 to the left.  Through every zero v of f' an
eta arc, the pre-image of the segment [1, f(v)], joins two of these points u
(or runs to +inf, where f tends to 1).  Cutting the strip along rays and arcs
leaves m_k regions, each mapped bijectively onto the plane minus slits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc
from shapely.geometry import LineString, Point, Polygon
from shapely.geometry.polygon import orient
from shapely.ops import polygonize, unary_union

from . import errors
from .series import evaluate_grid
from .tracing import mark_real_values
from .window import GridWindow
from .zeros import _winding_path

EXTEND = 1e-7
IMAGE_TOL = 1e-6


@dataclass
class EtaArc:
    branch_point: complex
    branch_id: str
    image_segment: tuple  # (1, f(v))
    points: np.ndarray  # from the first endpoint through v to the second
    endpoints: tuple  # per end: ("u", curve id) | ("unbounded", "right") | ("window", edge)
    residual: float = 0.0

    @property
    def unbounded(self) -> bool:
        return any(e[0] == "unbounded" for e in self.endpoints)

    def to_dict(self) -> dict:
        return {"branch_point": [self.branch_point.real, self.branch_point.imag], "branch_id": self.branch_id,
                "image_segment": [[complex(z).real, complex(z).imag] for z in self.image_segment],
                "points": [[p.real, p.imag] for p in self.points], "endpoints": [list(e) for e in self.endpoints],
                "residual": self.residual}

    @classmethod
    def from_dict(cls, d):
        return cls(complex(*d["branch_point"]), d["branch_id"], tuple(complex(*z) for z in d["image_segment"]),
                   np.array([complex(*p) for p in d["points"]]), tuple(tuple(e) for e in d["endpoints"]),
                   d["residual"])


@dataclass
class FundamentalDomain:
    strip: int
    index: int
    polygon: Polygon
    boundary: list  # typed segments: {"type": ..., "ref": ...}
    contains_zero: str | None
    image_slit: str
    bounded_right: bool
    slits: list = field(default_factory=list)  # finite image segments besides [1, inf)
    zero_location: complex | None = None
    window_box: tuple | None = None

    def to_dict(self) -> dict:
        return {"strip": self.strip, "index": self.index, "boundary": self.boundary,
                "polygon": [list(p) for p in self.polygon.exterior.coords],
                "contains_zero": self.contains_zero, "image_slit": self.image_slit,
                "bounded_right": self.bounded_right,
                "slits": [[[complex(a).real, complex(a).imag], [complex(b).real, complex(b).imag]] for a, b in self.slits],
                "zero_location": None if self.zero_location is None else [self.zero_location.real,
                                                                          self.zero_location.imag],
                "window_box": None if self.window_box is None else list(self.window_box)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["strip"], d["index"], Polygon(d["polygon"]), [dict(b) for b in d["boundary"]],
                   d["contains_zero"], d["image_slit"], d["bounded_right"],
                   [(complex(*a), complex(*b)) for a, b in d["slits"]],
                   None if d["zero_location"] is None else complex(*d["zero_location"]),
                   None if d["window_box"] is None else tuple(d["window_box"]))


# ---------------------------------------------------------------------------
# eta arcs
# ---------------------------------------------------------------------------

def _f01(spec, s: complex):
    v, _ = evaluate_grid(spec, np.array([s]))
    return complex(v[0, 0]), complex(v[1, 0]), complex(v[2, 0])


def _edge_of(window: GridWindow, s: complex):
    x0, x1, y0, y1 = window.box
    if s.real > x1:
        return "right"
    if s.real < x0:
        return "left"
    if s.imag > y1:
        return "top"
    if s.imag < y0:
        return "bottom"
    return None


def _clip_to_edge(window: GridWindow, a: complex, b: complex) -> complex:
    """Point where segment a -> b (a inside, b outside) meets the window boundary."""
    x0, x1, y0, y1 = window.box
    t = 1.0
    d = b - a
    for lo, hi, comp_a, comp_d in ((x0, x1, a.real, d.real), (y0, y1, a.imag, d.imag)):
        if comp_d > 0 and comp_a + comp_d > hi:
            t = min(t, (hi - comp_a) / comp_d)
        if comp_d < 0 and comp_a + comp_d < lo:
            t = min(t, (lo - comp_a) / comp_d)
    return a + t * d


def _eta_half(spec, v, fv, f2, sign, window, h, branch_tol, max_steps=20000):
    """One half of an eta arc: ``f(s) = f(v) + tau (1 - f(v))`` for tau from 0 to 1."""
    w = 1 - fv
    tau = min(0.5, h * h * abs(f2) / (2 * abs(w)))
    s = v + sign * np.sqrt(2 * tau * w / f2)
    pts = [v]
    worst = 0.0
    for _ in range(max_steps):
        target = fv + tau * w
        for _ in range(30):
            f0, f1, _ = _f01(spec, s)
            if abs(f1) < branch_tol:
                raise errors.BranchPointOnPath(f"eta arc from {v} met a zero of f' near {s}")
            d = (f0 - target) / f1
            s -= d
            if abs(d) < 1e-14 * (1 + abs(s)):
                break
        f0, f1, _ = _f01(spec, s)
        worst = max(worst, abs(f0 - target))
        edge = _edge_of(window, s)
        if edge is not None:
            e = _clip_to_edge(window, pts[-1], s)
            pts.append(e)
            kind = "unbounded" if edge == "right" else "window"
            return np.array(pts), (kind, edge), worst
        pts.append(s)
        if tau >= 1.0:
            return np.array(pts), ("u", None), worst
        # step in tau so that the predicted move has length about h
        dtau = h * abs(f1) / abs(w)
        dtau = min(dtau, 1.0 - tau)
        s = s + w * dtau / f1
        tau += dtau
    raise errors.ComponentTrackingLoss(f"eta arc from {v} did not terminate")


def build_eta_arcs(spec, strip, merge_tree, window: GridWindow, rays: list | None = None,
                   step: float | None = None) -> list:
    """Pre-image of the segment [1, f(v)] through every branch point of the strip's merge tree."""
    h = step or min(window.hx, window.hy) / 2
    nodes = [n for n in merge_tree.nodes]
    images = []
    arcs = []
    for n in nodes:
        v = n.branch_point
        fv, f1, f2 = _f01(spec, v)
        for other in images:
            if abs(abs(fv) - abs(other)) <= 1e-9 * max(1.0, abs(fv)):
                raise errors.DegenerateConfiguration(f"branch points share the image modulus {abs(fv):.12g}")
        images.append(fv)
        if abs(f2) == 0:
            raise errors.DegenerateConfiguration(f"f'' vanishes at the branch point {v}")
        branch_tol = 1e-3 * abs(f2) * h
        last = None
        for hh in (h, h / 4):
            try:
                a, ea, ra = _eta_half(spec, v, fv, f2, 1, window, hh, branch_tol)
                b, eb, rb = _eta_half(spec, v, fv, f2, -1, window, hh, branch_tol)
                break
            except errors.BranchPointOnPath as exc:
                last = exc
        else:
            raise last
        ends = []
        pts = [a, b]
        for i, e in enumerate((ea, eb)):
            if e[0] == "u" and rays:
                u = pts[i][-1]
                best = min(rays, key=lambda r: abs(r[1][0] - u))
                if abs(best[1][0] - u) <= 1e-6:
                    pts[i] = np.append(pts[i][:-1], best[1][0])
                    e = ("u", best[0])
            ends.append(e)
        points = np.concatenate([pts[0][::-1], pts[1][1:]])
        arcs.append(EtaArc(v, n.branch_id, (1.0, fv), points, (ends[0], ends[1]), max(ra, rb)))
    return arcs


# ---------------------------------------------------------------------------
# partition
# ---------------------------------------------------------------------------

def _gamma_rays(spec, curves, k):
    """Parts of Gamma_{k,j} (j != 0) with f >= 1 as (curve id, points from u to the window edge)."""
    out = []
    for c in curves:
        cl = c.classification
        if c.source != "f" or c.levelset.kind != "ImZero" or cl.kind != "GammaJ" or cl.k != k:
            continue
        c.ensure_values(spec)
        if not any(a.kind == "f-equals-1" for a in c.anchors):
            mark_real_values(c, spec, (1.0,))
        us = [a.index for a in c.anchors if a.kind == "f-equals-1"]
        if len(us) != 1:
            raise errors.BoundaryAssemblyFailure(f"curve {c.id} has {len(us)} points with f = 1")
        i = us[0]
        if c.values[0].real > 1:
            out.append((c.id, c.points[: i + 1][::-1].copy()))
        else:
            out.append((c.id, c.points[i:].copy()))
    return out


def _extend(points: np.ndarray, window: GridWindow, scale: float) -> np.ndarray:
    """Push endpoints lying on the window edge slightly outwards so that the union nodes them."""
    pts = points.copy()
    x0, x1, y0, y1 = window.box
    for i in (0, -1):
        p = pts[i]
        d = 0j
        if abs(p.real - x0) < 1e-9:
            d = -1
        elif abs(p.real - x1) < 1e-9:
            d = 1
        elif abs(p.imag - y0) < 1e-9:
            d = -1j
        elif abs(p.imag - y1) < 1e-9:
            d = 1j
        pts[i] = p + d * scale
    return pts


def _ls(points) -> LineString:
    return LineString(np.column_stack([points.real, points.imag]))


def _oriented(c):
    """Gamma' polyline from its left end to its right end."""
    return c.points if c.ends[0] == "left" else c.points[::-1]


def strip_polygon(curves_by_id: dict, strip) -> Polygon:
    lo, up = curves_by_id[strip.lower], curves_by_id[strip.upper]
    if set(lo.ends) != {"left", "right"} or set(up.ends) != {"left", "right"}:
        raise errors.IncompleteStrip(f"strip {strip.k} is not bounded by two spanning Gamma' curves")
    ring = np.concatenate([_oriented(lo), _oriented(up)[::-1]])
    poly = Polygon(np.column_stack([ring.real, ring.imag]))
    if not poly.is_valid:
        poly = poly.buffer(0)
    return poly


def partition_strip(spec, strip, curves: list, zeros_f: list, merge_tree, window: GridWindow,
                    step: float | None = None):
    """Split a complete strip into m_k fundamental domains; returns ``(domains, arcs)``."""
    if not strip.complete or strip.k == 0:
        raise errors.IncompleteStrip(f"strip {strip.k} is not complete inside the window")
    by_id = {c.id: c for c in curves}
    zs = [z for z in zeros_f if z.id in strip.zero_ids]
    if len(zs) != strip.zero_count:
        raise errors.IncompleteStrip("zero list does not match the strip record")
    poly = strip_polygon(by_id, strip)
    rays = _gamma_rays(spec, curves, strip.k)
    arcs = build_eta_arcs(spec, strip, merge_tree, window, rays, step)
    scale = EXTEND * max(window.width, window.height)
    lines = [poly.exterior]
    typed = [("GammaPrime", strip.lower, _ls(_oriented(by_id[strip.lower]))),
             ("GammaPrime", strip.upper, _ls(_oriented(by_id[strip.upper])))]
    for cid, pts in rays:
        ls = _ls(_extend(pts, window, scale))
        lines.append(ls)
        typed.append(("GammaRay", cid, ls))
    for i, a in enumerate(arcs):
        ls = _ls(_extend(a.points, window, scale))
        lines.append(ls)
        typed.append(("EtaArc", a.branch_id, ls))
    faces = [f for f in polygonize(unary_union(lines))
             if f.area > 1e-9 * poly.area and poly.contains(f.representative_point())]
    if len(faces) != strip.zero_count:
        gaps = [(a.branch_id, [complex(a.points[0]), complex(a.points[-1])]) for a in arcs]
        raise errors.BoundaryAssemblyFailure(
            f"strip {strip.k}: assembled {len(faces)} domains for {strip.zero_count} zeros; arc ends {gaps}")
    faces.sort(key=lambda f: (f.representative_point().y, f.representative_point().x))
    domains = []
    tol = 1e-6
    for idx, f in enumerate(faces):
        inside = [z for z in zs if f.buffer(tol).contains(Point(z.location.real, z.location.imag))]
        if len(inside) != 1:
            raise errors.BoundaryAssemblyFailure(f"domain {idx} of strip {strip.k} holds {len(inside)} zeros")
        z = inside[0]
        fb = f.boundary.buffer(10 * tol)
        bnd = [{"type": t, "ref": r} for t, r, ls in typed if fb.intersection(ls).length > 10 * tol]
        own = [a for a in arcs if any(b["type"] == "EtaArc" and b["ref"] == a.branch_id for b in bnd)]
        double = z.order == 2
        slit = ("positive real half axis and the interval from 1 to f(v)" if double
                else "[1, +inf) plus segments from 1 to f(v)" if own else "[1, +inf)")
        domains.append(FundamentalDomain(strip.k, idx, f, bnd, z.id, slit,
                                         bounded_right=not any(a.unbounded for a in own) and bool(own),
                                         slits=[(1.0, a.image_segment[1]) for a in own], zero_location=z.location,
                                         window_box=window.box))
    return domains, arcs


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def _dist_to_slits(z: np.ndarray, slits: list, double: bool = False) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    # the half line [1, +inf), or [0, +inf) in the double-zero case
    start = 0.0 if double else 1.0
    d = np.where(z.real >= start, np.abs(z.imag), np.abs(z - start))
    for a, b in slits:
        a, b = complex(a), complex(b)
        seg = b - a
        t = np.clip(((z - a) * np.conj(seg)).real / max(abs(seg) ** 2, 1e-300), 0, 1)
        d = np.minimum(d, np.abs(z - (a + t * seg)))
    return d


def _boundary_path(poly: Polygon, h: float) -> np.ndarray:
    xy = np.asarray(poly.exterior.coords)
    ring = xy[:, 0] + 1j * xy[:, 1]
    out = []
    for a, b in zip(ring[:-1], ring[1:]):
        n = max(1, int(math.ceil(abs(b - a) / h)))
        out.append(a + (b - a) * np.arange(n) / n)
    out.append(ring[-1:])
    return np.concatenate(out)


def preimage_count(spec, poly: Polygon, z: complex, h: float = 0.02) -> int:
    """Number of solutions of f(s) = z inside the polygon (argument principle on its boundary)."""
    path = _boundary_path(orient(poly, 1.0), h)

    def func(pts):
        v, b = evaluate_grid(spec, pts)
        return v[0] - z, b[0]

    return _winding_path(func, path)[0]


def interior_samples(poly: Polygon, n: int, clearance: float, seed: int = 0) -> np.ndarray:
    """Low-discrepancy points inside the polygon at least ``clearance`` away from its boundary."""
    inner = poly.buffer(-clearance)
    if inner.is_empty:
        raise errors.DegenerateConfiguration("domain too thin for the requested clearance")
    x0, y0, x1, y1 = inner.bounds
    sampler = qmc.Halton(2, seed=seed)
    out = []
    from shapely import contains_xy

    while len(out) < n:
        u = sampler.random(4 * n)
        x, y = x0 + (x1 - x0) * u[:, 0], y0 + (y1 - y0) * u[:, 1]
        ok = contains_xy(inner, x, y)
        out.extend((x[ok] + 1j * y[ok]).tolist())
    return np.array(out[:n])


def verify_fundamental(spec, domain: FundamentalDomain, sample_count: int = 1000, clearance: float = 1e-3,
                       zeros_f: list = (), seed: int = 0):
    """Numerical evidence that f maps the domain bijectively onto the plane minus slits."""
    from .verify import CheckReport

    poly = domain.polygon
    pts = interior_samples(poly, sample_count, clearance, seed)
    v, b = evaluate_grid(spec, pts)
    img, err = v[0], b[0]
    resolution = 10 * max(float(err.max()), 1e-15)
    witnesses = []
    # (i) pairwise distinct images and one preimage per sampled value
    tree = cKDTree(np.column_stack([img.real, img.imag]))
    pairs = tree.query_pairs(resolution)
    for i, j in list(pairs)[:5]:
        witnesses.append({"test": "injectivity", "points": [complex(pts[i]), complex(pts[j])]})
    double = domain.image_slit.startswith("positive")
    rng = np.random.default_rng(seed)
    probe = rng.choice(sample_count, size=min(sample_count, 64), replace=False)
    counts = []
    for i in probe:
        try:
            cnt = preimage_count(spec, poly, complex(img[i]))
        except errors.AtlasError as exc:
            witnesses.append({"test": "preimage-count", "point": complex(pts[i]), "error": str(exc)})
            continue
        counts.append(cnt)
        if cnt != 1:
            witnesses.append({"test": "injectivity", "point": complex(pts[i]), "preimages": cnt})
    # (ii) interior images stay off the slits
    dist = _dist_to_slits(img, domain.slits, double)
    for i in np.nonzero(dist <= 10 * err + 1e-14)[0][:5]:
        witnesses.append({"test": "interior-on-slit", "point": complex(pts[i]), "image": complex(img[i])})
    # (iii) boundary vertices away from window truncation map into the slits
    xy = np.asarray(poly.exterior.coords)
    bpts = xy[:, 0] + 1j * xy[:, 1]
    vb, _ = evaluate_grid(spec, bpts)
    db = _dist_to_slits(vb[0], domain.slits, double)
    on_edge = _near_window_edge(bpts, domain)
    bad = np.nonzero((db > IMAGE_TOL * (1 + np.abs(vb[0]))) & ~on_edge)[0]
    for i in bad[:5]:
        witnesses.append({"test": "boundary-off-slit", "point": complex(bpts[i]), "image": complex(vb[0][i])})
    # (iv) exactly one zero inside, by listed zeros and by the argument principle
    n0 = preimage_count(spec, poly, 0.0) if not double else 1
    listed = sum(1 for z in zeros_f if poly.contains(Point(z.location.real, z.location.imag)))
    if n0 != 1 or (zeros_f and listed != 1 and not double):
        witnesses.append({"test": "zero-count", "winding": n0, "listed": listed})
    margin = float(dist.min()) if dist.size else math.inf
    return CheckReport(f"fundamental_domain_{domain.strip}_{domain.index}", "fail" if witnesses else "pass",
                       margin, witnesses, {"resolution": resolution, "boundary": IMAGE_TOL, "clearance": clearance},
                       reason=f"{sample_count} samples, {len(counts)} preimage counts; injectivity is evidence, not proof")


def _near_window_edge(p: np.ndarray, domain: FundamentalDomain, tol: float = 1e-5) -> np.ndarray:
    x0, x1, y0, y1 = domain.window_box or _bounds_box(domain.polygon)
    return ((np.abs(p.real - x0) < tol) | (np.abs(p.real - x1) < tol)
            | (np.abs(p.imag - y0) < tol) | (np.abs(p.imag - y1) < tol))


def _bounds_box(poly):
    x0, y0, x1, y1 = poly.bounds
    return (x0, x1, y0, y1)


def merged_domain(a: FundamentalDomain, b: FundamentalDomain) -> FundamentalDomain:
    """Union of two adjacent domains: not a fundamental domain (used to exercise the checks)."""
    poly = unary_union([a.polygon, b.polygon.buffer(1e-9)])
    if poly.geom_type != "Polygon":
        raise errors.DegenerateConfiguration("domains are not adjacent")
    return FundamentalDomain(a.strip, -1, poly, a.boundary + b.boundary, a.contains_zero, a.image_slit,
                             False, a.slits + b.slits, a.zero_location, a.window_box)
