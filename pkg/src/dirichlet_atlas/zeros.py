"""Argument-principle zero counting, quadtree location, orders and merge trees.

Zeros of ``f``, ``f'`` and ``f''`` are counted by the winding number of the
target along a box boundary.  When the series has a pole at ``s = 1`` the
winding is taken for ``(s - 1)^(d+1) f^(d)``, which is holomorphic and has
the same zeros, so boxes may contain the pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .series import POLE_EXCLUSION, evaluate_grid
from .window import as_box

TARGETS = {"f": 0, "f-prime": 1, "f-double-prime": 2}

MAX_BOUNDARY_POINTS = 400_000
INFLATE = 1 + 2.0**-6
DOUBLE_ZERO_SCALE = 1e-5
CERTIFY_TOL = 1e-9


@dataclass
class ZeroRecord:
    location: complex
    target: str
    order: int
    residual: float
    count_certificate: tuple  # ((sigma0, sigma1, t0, t1), winding)
    strip: int | None = None
    on_curves: list = field(default_factory=list)
    id: str = ""

    def to_dict(self) -> dict:
        box, wind = self.count_certificate
        return {"id": self.id, "target": self.target, "sigma": self.location.real,
                "t": self.location.imag, "order": self.order, "residual": self.residual,
                "strip": self.strip, "on_curves": list(self.on_curves),
                "certificate": {"box": list(box), "winding": wind}}

    @classmethod
    def from_dict(cls, d: dict) -> "ZeroRecord":
        c = d["certificate"]
        return cls(complex(d["sigma"], d["t"]), d["target"], d["order"], d["residual"],
                   (tuple(c["box"]), c["winding"]), d.get("strip"), list(d.get("on_curves", [])),
                   d.get("id", ""))


def _order_of(target) -> int:
    if isinstance(target, int):
        return target
    try:
        return TARGETS[target]
    except KeyError:
        raise ValueError(f"unknown target {target!r}") from None


def target_values(spec, order: int, s):
    """``f^(order)`` and its bound, regularised at the pole: returns ``(g, bound)``."""
    vals, bnds = evaluate_grid(spec, s)
    g, b = vals[order], bnds[order]
    if spec.pole is not None:
        w = (np.asarray(s) - spec.pole) ** (order + 1)
        g, b = g * w, b * np.abs(w)
    return g, b


# ---------------------------------------------------------------------------
# winding numbers
# ---------------------------------------------------------------------------

def _boundary_params(box, h):
    x0, x1, y0, y1 = box
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    pts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        n = max(16, int(math.ceil(abs(b - a) / h)))
        pts.append(a + (b - a) * np.arange(n) / n)
    return np.concatenate(pts + [np.array([corners[0]])])


def _winding_path(func, path: np.ndarray):
    """Winding of ``func`` along a closed polyline with adaptive refinement.

    Returns ``(winding, min |g|, min |g| / bound)``; raises PhaseJump if the point budget runs out.
    """
    pts = path
    g, b = func(pts)
    for _ in range(60):
        if not np.all(np.isfinite(g)):
            raise errors.PhaseJump("non-finite target value on the boundary")
        if np.any(np.abs(g) <= b):
            raise errors.BoundaryTooCloseToZero("target indistinguishable from 0 on the boundary")
        dphi = np.angle(g[1:] / g[:-1])
        bad = (np.abs(dphi) > math.pi / 4) | (np.abs(g[1:] - g[:-1]) > np.minimum(np.abs(g[1:]), np.abs(g[:-1])))
        if not bad.any():
            break
        if pts.size + bad.sum() > MAX_BOUNDARY_POINTS:
            raise errors.PhaseJump("boundary phase could not be resolved")
        idx = np.nonzero(bad)[0]
        mid = 0.5 * (pts[idx] + pts[idx + 1])
        gm, bm = func(mid)
        pts = np.insert(pts, idx + 1, mid)
        g = np.insert(g, idx + 1, gm)
        b = np.insert(b, idx + 1, bm)
    else:
        raise errors.PhaseJump("boundary refinement did not settle")
    total = float(np.sum(np.angle(g[1:] / g[:-1])))
    ratio = np.abs(g) / np.maximum(b, np.finfo(float).tiny)
    return int(round(total / (2 * math.pi))), float(np.abs(g).min()), float(ratio.min())


def _box_winding(spec, order: int, box, h=None):
    x0, x1, y0, y1 = box
    if spec.pole is not None:
        p = spec.pole
        near = (x0 - POLE_EXCLUSION <= p.real <= x1 + POLE_EXCLUSION and
                y0 - POLE_EXCLUSION <= p.imag <= y1 + POLE_EXCLUSION and
                min(abs(p.real - x0), abs(p.real - x1), abs(p.imag - y0), abs(p.imag - y1)) < POLE_EXCLUSION)
        if near:
            raise errors.BoundaryTooCloseToZero("box boundary passes through the pole exclusion disc")
    if h is None:
        h = min(0.05, max(x1 - x0, y1 - y0) / 16)
    path = _boundary_params(box, h)
    wind, gmin, ratio = _winding_path(lambda z: target_values(spec, order, z), path)
    if ratio <= 100 or gmin == 0:
        raise errors.BoundaryTooCloseToZero(f"|target| = {gmin:.3g} on the boundary")
    return wind, gmin


def _inflate(box, factor):
    x0, x1, y0, y1 = box
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    hx, hy = 0.5 * (x1 - x0) * factor, 0.5 * (y1 - y0) * factor
    return (cx - hx, cx + hx, cy - hy, cy + hy)


def count_zeros_certified(spec, target, box, max_perturb: int = 5):
    """Winding number with the (possibly inflated) box that certifies it."""
    order = _order_of(target)
    box = as_box(box)
    last = None
    for attempt in range(max_perturb + 1):
        try:
            wind, _ = _box_winding(spec, order, box)
            return wind, box
        except (errors.BoundaryTooCloseToZero, errors.PhaseJump) as exc:
            last = exc
            box = _inflate(box, INFLATE)
    if isinstance(last, errors.PhaseJump):
        raise last
    raise errors.BoundaryTooCloseToZero(f"boundary still too close to a zero after {max_perturb} perturbations")


def count_zeros(spec, target, box) -> int:
    """Number of zeros (with multiplicity) of the target inside ``box = (s0, s1, t0, t1)``."""
    return count_zeros_certified(spec, target, box)[0]


def winding_on_circle(spec, target, center: complex, radius: float, n: int = 64) -> int:
    order = _order_of(target)
    theta = 2 * np.pi * np.arange(n + 1) / n
    path = center + radius * np.exp(1j * theta)
    path[-1] = path[0]
    return _winding_path(lambda z: target_values(spec, order, z), path)[0]


# ---------------------------------------------------------------------------
# Newton refinement and orders
# ---------------------------------------------------------------------------

def _derivs(spec, order: int, s: complex):
    """``(f^(order), f^(order+1), bound)`` at a point."""
    if order < 2:
        v, b = evaluate_grid(spec, np.array([s]))
        return complex(v[order, 0]), complex(v[order + 1, 0]), float(b[order, 0])
    h = 1e-4
    v, b = evaluate_grid(spec, np.array([s, s + h, s - h]))
    return complex(v[2, 0]), complex((v[2, 1] - v[2, 2]) / (2 * h)), float(b[2, 0])


def newton(spec, order: int, s0: complex, box=None, maxiter: int = 60, tol: float = 1e-14):
    """Newton iteration for ``f^(order)``; returns ``(s, |g(s)|, bound)`` or raises NewtonStall."""
    s = complex(s0)
    pad = 0.0 if box is None else 0.25 * max(box[1] - box[0], box[3] - box[2])
    for _ in range(maxiter):
        g, dg, b = _derivs(spec, order, s)
        if dg == 0 or not np.isfinite(abs(g)):
            raise errors.NewtonStall(f"derivative vanished at {s}")
        step = g / dg
        s = s - step
        if box is not None and not (box[0] - pad <= s.real <= box[1] + pad and box[2] - pad <= s.imag <= box[3] + pad):
            raise errors.NewtonStall("Newton iterate left its box")
        if abs(step) <= tol * (1 + abs(s)):
            g, _, b = _derivs(spec, order, s)
            return s, abs(g), b
    g, _, b = _derivs(spec, order, s)
    if abs(g) <= 1e3 * b:
        return s, abs(g), b
    raise errors.NewtonStall(f"Newton did not converge from {s0}")


def zero_order(spec, s0: complex, tol: float = 1e-10, target="f", radius: float = 1e-3) -> int:
    """Multiplicity (1 or 2) of a certified zero of the target.

    A double-zero candidate needs ``|g'(s0)| < 1e-4 (1 + |g''(s0)| radius)`` and is
    confirmed by winding 2 around a small circle; winding >= 3 raises
    OrderExceedsTwo and a small derivative with winding 1 raises AmbiguousOrder.
    """
    order = _order_of(target)
    s0 = complex(s0)
    if order == 0:
        v, _ = evaluate_grid(spec, np.array([s0]))
        d1, d2 = abs(v[1, 0]), abs(v[2, 0])
    else:
        h = 1e-4
        v, _ = evaluate_grid(spec, np.array([s0, s0 + h, s0 - h]))
        d1 = abs(v[order + 1, 0]) if order == 1 else abs((v[2, 1] - v[2, 2]) / (2 * h))
        d2 = abs((v[order, 1] + v[order, 2] - 2 * v[order, 0]) / h**2)
    if d1 >= 1e-4 * (1 + d2 * radius):
        return 1
    wind = None
    for rho in (radius, radius / 4, radius * 4):
        try:
            wind = winding_on_circle(spec, order, s0, rho)
            break
        except errors.PhaseJump:
            continue
    if wind is None:
        raise errors.AmbiguousOrder(f"no clean circle around {s0}")
    if wind >= 3:
        raise errors.OrderExceedsTwo(f"zero of order {wind} at {s0}: numerical breakdown or counterexample")
    if wind == 2:
        return 2
    raise errors.AmbiguousOrder(f"|derivative| = {d1:.3g} small but winding is {wind}; rerun at higher precision")


# ---------------------------------------------------------------------------
# quadtree location
# ---------------------------------------------------------------------------

def _split_point(spec, order, box):
    """Split fractions along x and y chosen so the cut lines stay away from small |g|."""
    x0, x1, y0, y1 = box
    best = []
    for horizontal in (False, True):
        cand, score = 0.5, -1.0
        for frac in (0.5, 0.44, 0.56, 0.38, 0.62):
            if horizontal:
                c = y0 + frac * (y1 - y0)
                line = np.linspace(x0, x1, 33) + 1j * c
            else:
                c = x0 + frac * (x1 - x0)
                line = c + 1j * np.linspace(y0, y1, 33)
            g, _ = target_values(spec, order, line)
            m = float(np.nanmin(np.abs(g))) if np.all(np.isfinite(g)) else 0.0
            if m > score:
                cand, score = c, m
        best.append(cand)
    return best


def locate_zeros(spec, target, window, tol: float = CERTIFY_TOL, max_depth: int = 40) -> list:
    """Quadtree search: every zero of the target in the window, each with its certificate box."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    order = _order_of(target)
    tname = target if isinstance(target, str) else [k for k, v in TARGETS.items() if v == order][0]
    total, box = count_zeros_certified(spec, order, as_box(window))
    records = []
    stack = [(box, total, 0)]
    while stack:
        bx, cnt, depth = stack.pop()
        if cnt == 0:
            continue
        if cnt < 0:
            raise errors.PhaseJump(f"negative count in box {bx}; pole not regularised?")
        size = max(bx[1] - bx[0], bx[3] - bx[2])
        center = complex(0.5 * (bx[0] + bx[1]), 0.5 * (bx[2] + bx[3]))
        if cnt == 1 or size < DOUBLE_ZERO_SCALE or depth >= max_depth:
            rec = _refine_in_box(spec, order, tname, bx, cnt, center, tol)
            if rec is not None:
                records.append(rec)
                continue
            if size < DOUBLE_ZERO_SCALE or depth >= max_depth:
                raise errors.NewtonStall(f"could not refine {cnt} zero(s) in box {bx}")
        elif cnt == 2 and size < 0.05:
            rec = _double_candidate(spec, order, tname, bx, tol)
            if rec is not None:
                records.append(rec)
                continue
        xs, ys = _split_point(spec, order, bx)
        children = [(bx[0], xs, bx[2], ys), (xs, bx[1], bx[2], ys),
                    (bx[0], xs, ys, bx[3]), (xs, bx[1], ys, bx[3])]
        counts = []
        for ch in children:
            try:
                counts.append(_box_winding(spec, order, ch)[0])
            except (errors.BoundaryTooCloseToZero, errors.PhaseJump):
                counts = None
                break
        if counts is None or sum(counts) != cnt:
            # retry with the plain bisection point before giving up
            xs, ys = 0.5 * (bx[0] + bx[1]) + 0.013 * (bx[1] - bx[0]), 0.5 * (bx[2] + bx[3]) - 0.011 * (bx[3] - bx[2])
            children = [(bx[0], xs, bx[2], ys), (xs, bx[1], bx[2], ys),
                        (bx[0], xs, ys, bx[3]), (xs, bx[1], ys, bx[3])]
            counts = [count_zeros_certified(spec, order, ch, max_perturb=0)[0] for ch in children]
            if sum(counts) != cnt:
                raise errors.PhaseJump(f"child counts {counts} do not add up to {cnt} in {bx}")
        for ch, c in zip(children, counts):
            stack.append((ch, c, depth + 1))
    records.sort(key=lambda r: (round(r.location.imag, 9), round(r.location.real, 9)))
    for i, r in enumerate(records):
        r.id = f"{tname}:{i}"
    return records


def _inside(box, s, pad=0.0):
    return box[0] - pad <= s.real <= box[1] + pad and box[2] - pad <= s.imag <= box[3] + pad


def _refine_in_box(spec, order, tname, box, cnt, center, tol):
    try:
        s, res, bound = newton(spec, order, center, box)
    except errors.NewtonStall:
        return None
    if not _inside(box, s) or res > tol + 10 * bound:
        return None
    mult = 1 if cnt == 1 else zero_order(spec, s, tol, target=order)
    if mult != cnt:
        return None
    return ZeroRecord(s, tname, mult, res, (tuple(box), cnt))


def _double_candidate(spec, order, tname, box, tol):
    """A count-2 box may hold a double zero: look for a common zero of g and g'."""
    center = complex(0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3]))
    if order >= 2:
        return None
    try:
        v, _, _ = newton(spec, order + 1, center, box)
    except errors.NewtonStall:
        return None
    if not _inside(box, v):
        return None
    try:
        s, res, bound = newton(spec, order, v, box)
    except errors.NewtonStall:
        s = v
        g, _, bound = _derivs(spec, order, v)
        res = abs(g)
    if res > tol + 10 * bound:
        return None
    try:
        mult = zero_order(spec, s, tol, target=order)
    except errors.AmbiguousOrder:
        return None
    if mult != 2:
        return None
    return ZeroRecord(s, tname, 2, res, (tuple(box), 2))


# ---------------------------------------------------------------------------
# merge trees
# ---------------------------------------------------------------------------

@dataclass
class MergeNode:
    branch_point: complex
    branch_id: str
    radius: float
    children: tuple  # node ids ("zero id" for leaves, "node:<i>" for internal nodes)

    def to_dict(self) -> dict:
        return {"branch_point": [self.branch_point.real, self.branch_point.imag],
                "branch_id": self.branch_id, "radius": self.radius, "children": list(self.children)}


@dataclass
class MergeTree:
    strip: int
    leaves: list
    nodes: list
    root: str
    root_radius: float
    partial: bool = False

    @property
    def internal_count(self) -> int:
        return len(self.nodes)

    def is_full_binary(self) -> bool:
        if len(self.nodes) != len(self.leaves) - 1:
            return False
        seen = set()
        for n in self.nodes:
            if len(n.children) != 2:
                return False
            seen.update(n.children)
        expected = set(self.leaves) | {f"node:{i}" for i in range(len(self.nodes) - 1)}
        return seen == expected if self.nodes else len(self.leaves) == 1

    def radii_increase(self) -> bool:
        for i, n in enumerate(self.nodes):
            for c in n.children:
                if c.startswith("node:") and self.nodes[int(c[5:])].radius >= n.radius:
                    return False
        return True

    def to_dict(self) -> dict:
        return {"strip": self.strip, "leaves": list(self.leaves), "nodes": [n.to_dict() for n in self.nodes],
                "root": self.root, "root_radius": self.root_radius, "partial": self.partial}

    @classmethod
    def from_dict(cls, d):
        nodes = [MergeNode(complex(*n["branch_point"]), n["branch_id"], n["radius"], tuple(n["children"]))
                 for n in d["nodes"]]
        return cls(d["strip"], list(d["leaves"]), nodes, d["root"], d["root_radius"], d.get("partial", False))


def descend_to_zero(spec, v: complex, direction: complex, tol: float = 1e-12):
    """Follow the pre-image of the segment from f(v) to 0 starting at v along ``direction``.

    Along this path ``f(s) = (1 - tau) f(v)``; it ends at a zero of f unless it
    meets another branch point.
    """
    vals, _ = evaluate_grid(spec, np.array([v]))
    fv, f2 = complex(vals[0, 0]), complex(vals[2, 0])
    taus = np.linspace(0.0, 1.0, 201)
    # near the saddle f(s) - f(v) ~ f''(v) (s - v)^2 / 2
    s = v + direction * math.sqrt(2 * taus[1] * abs(fv) / abs(f2))
    f1 = None
    for k, tau in enumerate(taus[1:], start=1):
        target = (1 - tau) * fv
        if f1 is not None:
            s = s - fv * (taus[k] - taus[k - 1]) / f1
        for _ in range(30):
            w, _ = evaluate_grid(spec, np.array([s]))
            f0, f1 = complex(w[0, 0]), complex(w[1, 0])
            if abs(f1) < 1e-10:
                raise errors.DerivativeZeroNotFound(f"descent from {v} met another branch point")
            d = (f0 - target) / f1
            s -= d
            if abs(d) < 1e-13 * (1 + abs(s)):
                break
    zs, res, _ = newton(spec, 0, s)
    if res > tol + 1e-9:
        raise errors.ComponentTrackingLoss(f"descent from {v} did not end at a zero")
    return zs


def build_merge_tree(spec, strip_index: int, zeros_f: list, zeros_fp: list, partial: bool = False) -> MergeTree:
    """Binary tree of circle pre-image fusions inside one strip.

    Leaves are the zeros of f in the strip.  Each zero v of f' is a saddle of
    |f|: the two components of ``{|f| < r}`` meeting there fuse at
    ``r = |f(v)|``.  The two descent paths of ``arg f = const`` from v identify
    which zeros they contain; sorting saddles by radius assembles the tree.
    """
    leaves = [z.id for z in zeros_f]
    if not zeros_f:
        raise errors.ComponentTrackingLoss("strip has no zeros")
    parent = {z: z for z in leaves}
    group_node = {z: z for z in leaves}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    saddles = []
    for bp in zeros_fp:
        v = bp.location
        w, _ = evaluate_grid(spec, np.array([v]))
        fv, f2 = complex(w[0, 0]), complex(w[2, 0])
        if f2 == 0:
            raise errors.DerivativeZeroNotFound(f"degenerate branch point at {v}")
        d = np.sqrt(-fv / f2)
        d = d / abs(d)
        ends = []
        for sign in (1, -1):
            zloc = descend_to_zero(spec, v, sign * d)
            dist = [abs(zloc - z.location) for z in zeros_f]
            k = int(np.argmin(dist))
            if dist[k] > 1e-6:
                raise errors.ComponentTrackingLoss(f"descent from {v} reached {zloc}, outside the strip's zero set")
            ends.append(zeros_f[k].id)
        saddles.append((abs(fv), bp, ends))
    saddles.sort(key=lambda x: x[0])
    nodes = []
    for r, bp, (a, b) in saddles:
        ra, rb = find(a), find(b)
        if ra == rb:
            raise errors.ComponentTrackingLoss(f"branch point {bp.location} joins a component to itself")
        nid = f"node:{len(nodes)}"
        nodes.append(MergeNode(bp.location, bp.id, r, (group_node[ra], group_node[rb])))
        parent[rb] = ra
        group_node[ra] = nid
    roots = {find(z) for z in leaves}
    root = group_node[next(iter(roots))] if len(roots) == 1 else ""
    tree = MergeTree(strip_index, leaves, nodes, root, nodes[-1].radius if nodes else 0.0, partial)
    if len(roots) != 1 and not partial:
        raise errors.ComponentTrackingLoss(f"{len(roots)} separate components remain; tree incomplete")
    return tree
