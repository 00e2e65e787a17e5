"""Level-set tracing: pre-images of the real axis and of circles ``|z| = r``.

Seeds come from sign changes of the level function on a grid (marching
squares edges); each seed is projected onto the level set and followed in
both directions by predictor-corrector continuation.  Components are
clipped at the window edges, stopped next to the pole and closed when they
return to their start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import errors
from .series import POLE_EXCLUSION, evaluate_grid
from .window import GridWindow

SOURCES = {"f": 0, "f-prime": 1}
GEOMETRY_TOL = 1e-6
DEFECT_TOL = 1e-9
SMALL_DERIVATIVE = 0.05
COLOR_OF = {("f", 1): 1, ("f", -1): 2, ("f-prime", 1): 3, ("f-prime", -1): 4}


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSet:
    kind: str  # "ImZero" or "AbsEq"
    r: float | None = None

    def __post_init__(self):
        if self.kind not in ("ImZero", "AbsEq"):
            raise ValueError(f"unknown level set {self.kind!r}")
        if self.kind == "AbsEq" and not (self.r is not None and self.r > 0):
            raise ValueError("AbsEq needs r > 0")

    @classmethod
    def parse(cls, obj) -> "LevelSet":
        if isinstance(obj, LevelSet):
            return obj
        if isinstance(obj, (tuple, list)):
            return cls("AbsEq", float(obj[1])) if obj[0] == "AbsEq" else cls("ImZero")
        text = str(obj)
        if text.lower() in ("imzero", "im", "real-axis"):
            return cls("ImZero")
        if text.lower().startswith(("abseq", "abs")):
            # "AbsEq(0.5)" (the label form) or "abs:0.5"
            arg = text.split(":", 1)[1] if ":" in text else text[text.find("("):]
            return cls("AbsEq", float(arg.strip("() ")))
        raise ValueError(f"cannot parse level set {obj!r}")

    @property
    def label(self) -> str:
        return "ImZero" if self.kind == "ImZero" else f"AbsEq({self.r:g})"


@dataclass
class CurveClass:
    kind: str = "Unknown"
    k: int | None = None
    j: int | None = None
    r: float | None = None
    bounded: bool | None = None
    fused_gamma_r: bool = False
    reason: str = ""

    @property
    def label(self) -> str:
        if self.kind == "CircleComponent":
            return f"CircleComponent({self.r:g}, bounded={self.bounded}, fused={self.fused_gamma_r})"
        if self.kind in ("GammaJ", "UpsilonJ"):
            return f"{self.kind}({self.k},{self.j})"
        if self.kind == "Unknown":
            return "Unknown"
        return f"{self.kind}({self.k})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k, "j": self.j, "r": self.r, "bounded": self.bounded,
                "fused_gamma_r": self.fused_gamma_r, "reason": self.reason}


@dataclass
class MarkedPoint:
    location: complex
    kind: str  # f-equals-1 | f-equals-minus-1 | zero-on-curve | horizontal-tangent | intertwining-intersection | real-crossing
    defect: float
    index: int = -1
    ref: str = ""

    def to_dict(self) -> dict:
        return {"location": [self.location.real, self.location.imag], "kind": self.kind,
                "defect": self.defect, "index": self.index, "ref": self.ref}


@dataclass
class TracedCurve:
    id: str
    points: np.ndarray
    source: str
    levelset: LevelSet
    classification: CurveClass = field(default_factory=CurveClass)
    orientation: int = 1
    color_runs: list = field(default_factory=list)
    anchors: list = field(default_factory=list)
    truncated: bool = False
    closed: bool = False
    ends: tuple = ("", "")
    values: np.ndarray | None = field(default=None, repr=False)
    dvalues: np.ndarray | None = field(default=None, repr=False)
    step: float = 0.0

    @property
    def ends_at_pole(self) -> bool:
        return "pole" in self.ends

    def max_defect(self) -> float:
        F = self.values
        if self.levelset.kind == "ImZero":
            return float(np.max(np.abs(F.imag) / (1 + np.abs(F))))
        r = self.levelset.r
        return float(np.max(np.abs(np.abs(F) - r) / (1 + r)))

    def to_dict(self) -> dict:
        return {"id": self.id, "source": self.source, "levelset": self.levelset.label,
                "class": self.classification.label, "classification": self.classification.to_dict(),
                "k": self.classification.k, "j": self.classification.j,
                "points": [[p.real, p.imag] for p in self.points],
                "color_runs": [list(c) for c in self.color_runs],
                "anchors": [a.to_dict() for a in self.anchors],
                "truncated": self.truncated, "closed": self.closed, "ends": list(self.ends),
                "orientation": self.orientation, "step": self.step}

    @classmethod
    def from_dict(cls, d: dict) -> "TracedCurve":
        c = d["classification"]
        anchors = [MarkedPoint(complex(*a["location"]), a["kind"], a["defect"], a["index"], a["ref"])
                   for a in d["anchors"]]
        pts = np.array([complex(x, y) for x, y in d["points"]], dtype=complex)
        return cls(d["id"], pts, d["source"], LevelSet.parse(d["levelset"]), CurveClass(**c),
                   d["orientation"], [tuple(x) for x in d["color_runs"]], anchors, d["truncated"],
                   d["closed"], tuple(d["ends"]), step=d.get("step", 0.0))

    def ensure_values(self, spec):
        if self.values is None or self.values.shape != self.points.shape:
            o = SOURCES[self.source]
            v, _ = evaluate_grid(spec, self.points)
            self.values, self.dvalues = v[o], v[o + 1]
        return self


@dataclass
class StripRecord:
    k: int
    lower: str | None
    upper: str | None
    zero_count: int = 0
    J_k: list = field(default_factory=list)
    contains_one: bool = False
    complete: bool = False
    zero_ids: list = field(default_factory=list)
    branch_ids: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"k": self.k, "lower": self.lower, "upper": self.upper, "zero_count": self.zero_count,
                "J_k": list(self.J_k), "contains_one": self.contains_one, "complete": self.complete,
                "zero_ids": list(self.zero_ids), "branch_ids": list(self.branch_ids)}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


# ---------------------------------------------------------------------------
# level functions
# ---------------------------------------------------------------------------

class _Level:
    """Evaluates ``phi`` (real level function) and its complex gradient for one source/level pair."""

    def __init__(self, spec, source: str, level: LevelSet):
        self.spec = spec
        self.order = SOURCES[source]
        self.level = level
        self.kernel = getattr(spec, "_kernel", None)

    def eval(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        if self.kernel is not None:
            v, _ = self.kernel.evaluate(s)
        else:
            v, _ = evaluate_grid(self.spec, s)
        return v[self.order], v[self.order + 1], v[min(self.order + 2, 2)]

    def phi(self, F):
        if self.level.kind == "ImZero":
            return F.imag
        return np.abs(F) - self.level.r

    def grad(self, F, dF):
        if self.level.kind == "ImZero":
            return 1j * np.conj(dF)
        return F * np.conj(dF) / np.abs(F)

    def scale(self, F):
        return 1 + (np.abs(F) if self.level.kind == "ImZero" else np.full(np.shape(F), self.level.r))

    def point(self, s: complex):
        F, dF, _ = self.eval(s)
        F, dF = complex(F[0]), complex(dF[0])
        return F, dF, float(self.phi(np.array([F]))[0]), complex(self.grad(np.array([F]), np.array([dF]))[0])


def _project(lv: _Level, s: complex, tol: float = DEFECT_TOL, maxiter: int = 12, max_move: float | None = None):
    """Newton projection onto the level set along the gradient."""
    s0 = s
    for _ in range(maxiter):
        F, dF, ph, g = lv.point(s)
        if not math.isfinite(ph):
            return None
        if abs(ph) <= tol * lv.scale(np.array([F]))[0]:
            return s, F, dF
        gg = abs(g) ** 2
        if gg == 0:
            return None
        s = s - ph * g / gg
        if max_move is not None and abs(s - s0) > max_move:
            return None
    F, dF, ph, g = lv.point(s)
    if abs(ph) <= 10 * tol * lv.scale(np.array([F]))[0]:
        return s, F, dF
    return None


def _edge_root(lv: _Level, a: complex, b: complex, pa: float, pb: float):
    """Root of phi on the straight segment [a, b] by safeguarded secant (Illinois)."""
    fa, fb = pa, pb
    if fa == 0:
        return a
    for _ in range(60):
        c = b - fb * (b - a) / (fb - fa)
        _, _, fc, _ = lv.point(c)
        if abs(c - b) < 1e-15 * (1 + abs(c)) or fc == 0:
            return c
        if (fc > 0) == (fb > 0):
            fa *= 0.5
        else:
            a, fa = b, fb
        b, fb = c, fc
    return b


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------

def _edge_name(win: GridWindow, s: complex) -> str:
    d = {"left": abs(s.real - win.sigma_min), "right": abs(s.real - win.sigma_max),
         "bottom": abs(s.imag - win.t_min), "top": abs(s.imag - win.t_max)}
    return min(d, key=d.get)


def _clip(lv, win, s_in, s_out):
    """Point where the level set leaves the window between an inside and an outside point."""
    x0, x1, y0, y1 = win.box
    d = s_out - s_in
    ts = []
    for lo, hi, p, dp in ((x0, x1, s_in.real, d.real), (y0, y1, s_in.imag, d.imag)):
        if dp > 0 and p + dp > hi:
            ts.append((hi - p) / dp)
        if dp < 0 and p + dp < lo:
            ts.append((lo - p) / dp)
    t = min(ts) if ts else 1.0
    b = s_in + t * d
    edge = _edge_name(win, b)
    # slide along the edge to the exact level-set crossing
    along = 1j if edge in ("left", "right") else 1.0
    span = 2 * abs(d) + 1e-12
    a0, a1 = b - span * along, b + span * along
    _, _, p0, _ = lv.point(a0)
    _, _, p1, _ = lv.point(a1)
    if p0 * p1 < 0:
        b = _edge_root(lv, a0, a1, p0, p1)
        lo_b = (x0, y0)
        hi_b = (x1, y1)
        b = complex(min(max(b.real, lo_b[0]), hi_b[0]), min(max(b.imag, lo_b[1]), hi_b[1]))
    return b, edge


def _march(lv: _Level, win: GridWindow, s0: complex, tangent0: complex, h0: float, pole, max_steps: int):
    """Follow the level set from s0 in the direction of ``tangent0``; returns (points, end tag)."""
    pts = [s0]
    s = s0
    T_prev = tangent0 / abs(tangent0)
    h = h0
    travelled = 0.0
    pole_r = max(3 * h0, 10 * POLE_EXCLUSION)
    for _ in range(max_steps):
        F, dF, ph, g = lv.point(s)
        if abs(g) == 0:
            return pts, "stall"
        T = 1j * g / abs(g)
        if (T * T_prev.conjugate()).real < 0:
            T = -T
        hh = h if abs(dF) >= SMALL_DERIVATIVE else min(h, h0 / 8)
        while True:
            pred = s + hh * T
            res = _project(lv, pred, max_move=hh)
            ok = res is not None
            if ok:
                s_new = res[0]
                F2, dF2, _, g2 = lv.point(s_new)
                if abs(g2) == 0:
                    ok = False
                else:
                    T2 = 1j * g2 / abs(g2)
                    if (T2 * T.conjugate()).real < 0:
                        T2 = -T2
                    ok = abs(np.angle(T2 / T)) < 0.35 and abs(s_new - s) < 2 * hh
            if ok:
                break
            hh *= 0.5
            if hh < h0 * 2.0**-12:
                return pts, "stall"
        if not win.contains(s_new):
            b, edge = _clip(lv, win, s, s_new)
            pts.append(b)
            return pts, edge
        if pole is not None and abs(s_new - pole) < pole_r:
            return pts, "pole"
        travelled += abs(s_new - s)
        pts.append(s_new)
        if travelled > 6 * h0 and abs(s_new - s0) < 0.75 * hh and len(pts) > 6:
            pts[-1] = s0
            return pts, "closed"
        T_prev = T
        s = s_new
        h = min(h0, hh * 1.5)
    return pts, "max-steps"


def _seeds(lv: _Level, win: GridWindow, grid_vals: np.ndarray):
    phi = lv.phi(grid_vals)
    X = win.mesh()
    out = []
    finite = np.isfinite(phi)
    sgn = np.sign(phi)
    # horizontal edges then vertical edges, row-major
    hmask = (sgn[:, :-1] * sgn[:, 1:] < 0) & finite[:, :-1] & finite[:, 1:]
    vmask = (sgn[:-1, :] * sgn[1:, :] < 0) & finite[:-1, :] & finite[1:, :]
    for (i, j) in zip(*np.nonzero(hmask)):
        a, b, pa, pb = X[i, j], X[i, j + 1], phi[i, j], phi[i, j + 1]
        out.append(a + (b - a) * pa / (pa - pb))
    for (i, j) in zip(*np.nonzero(vmask)):
        a, b, pa, pb = X[i, j], X[i + 1, j], phi[i, j], phi[i + 1, j]
        out.append(a + (b - a) * pa / (pa - pb))
    return out


class _Coverage:
    """Spatial index of traced polylines for duplicate suppression."""

    def __init__(self):
        self.pts = np.zeros(0, dtype=complex)
        self.nxt = np.zeros(0, dtype=np.int64)
        self.tree = None

    def add(self, poly: np.ndarray):
        base = self.pts.size
        nxt = np.arange(base + 1, base + poly.size + 1)
        nxt[-1] = -1
        self.pts = np.concatenate([self.pts, poly])
        self.nxt = np.concatenate([self.nxt, nxt])
        self.tree = cKDTree(np.column_stack([self.pts.real, self.pts.imag]))

    def distance(self, s: complex, radius: float) -> float:
        if self.tree is None:
            return math.inf
        idx = self.tree.query_ball_point([s.real, s.imag], radius)
        best = math.inf
        for i in idx:
            best = min(best, abs(s - self.pts[i]))
            for a, b in ((i, self.nxt[i]), (i - 1, i)):
                if a < 0 or b < 0 or self.nxt[a] != b:
                    continue
                p, q = self.pts[a], self.pts[b]
                d = q - p
                if d == 0:
                    continue
                t = min(1.0, max(0.0, ((s - p) * d.conjugate()).real / abs(d) ** 2))
                best = min(best, abs(s - (p + t * d)))
        return best


def trace_level_set(spec, source: str, levelset, window: GridWindow, step: float | None = None,
                    extra_seeds=(), max_steps: int = 200_000) -> list:
    """Trace every component of ``Im F = 0`` or ``|F| = r`` (F = f or f') meeting the window.

    ``extra_seeds`` are points close to the level set (e.g. zeros of F) that
    guarantee small components are not missed by the grid.
    """
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}")
    level = LevelSet.parse(levelset)
    h_grid = min(window.hx, window.hy)
    if step is None:
        step = h_grid
    if step > min(window.width, window.height) / 64:
        raise errors.ResolutionInsufficient("step must not exceed min(window extents)/64")
    lv = _Level(spec, source, level)
    pole = getattr(spec, "pole", None)
    X = window.mesh()
    vals, _ = evaluate_grid(spec, X)
    F = vals[lv.order]
    if pole is not None:
        F = np.where(np.abs(X - pole) < POLE_EXCLUSION, np.nan, F)
    seeds = list(extra_seeds) + _seeds(lv, window, F)
    cover = _Coverage()
    curves = []
    dup_radius = 0.3 * step
    for seed in seeds:
        if pole is not None and abs(seed - pole) < max(4 * step, 10 * POLE_EXCLUSION):
            continue
        if not window.contains(seed):
            continue
        if cover.distance(seed, 2 * step) < dup_radius:
            continue
        res = _project(lv, seed, max_move=2 * step)
        if res is None:
            continue
        s0 = res[0]
        if not window.contains(s0) or cover.distance(s0, 2 * step) < dup_radius:
            continue
        _, _, _, g = lv.point(s0)
        if abs(g) == 0:
            continue
        T0 = 1j * g / abs(g)
        fwd, end_f = _march(lv, window, s0, T0, step, pole, max_steps)
        if end_f == "closed":
            poly, ends = np.array(fwd), ("closed", "closed")
        else:
            bwd, end_b = _march(lv, window, s0, -T0, step, pole, max_steps)
            poly = np.array(bwd[::-1] + fwd[1:])
            ends = (end_b, end_f)
        if poly.size < 2:
            continue
        cover.add(poly)
        curve = TracedCurve(id="", points=poly, source=source, levelset=level,
                            truncated=any(e in ("left", "right", "top", "bottom") for e in ends),
                            closed=ends[0] == "closed", ends=ends, step=step)
        curve.ensure_values(spec)
        curves.append(curve)
    for c in curves:
        _orient(c)
    curves.sort(key=lambda c: (round(float(np.min(c.points.imag)), 9), round(float(np.min(c.points.real)), 9)))
    for i, c in enumerate(curves):
        c.id = f"{source}|{level.label}|{i}"
    return curves


def _orient(c: TracedCurve):
    """Order points so that the image runs forward: increasing Re F on real-axis pre-images, counterclockwise on circles."""
    F = c.values
    if c.levelset.kind == "ImZero":
        flip = (not c.closed) and F[-1].real < F[0].real
    else:
        turn = float(np.sum(np.angle(F[1:] / F[:-1])))
        flip = turn < 0
    if flip:
        c.points = c.points[::-1].copy()
        c.values = c.values[::-1].copy()
        c.dvalues = c.dvalues[::-1].copy()
        c.ends = c.ends[::-1]
    c.orientation = 1


# ---------------------------------------------------------------------------
# markers on curves
# ---------------------------------------------------------------------------

def _insert(c: TracedCurve, idx: int, s: complex, spec):
    """Insert ``s`` after position idx, keep values consistent; returns its index."""
    c.points = np.insert(c.points, idx + 1, s)
    o = SOURCES[c.source]
    v, _ = evaluate_grid(spec, np.array([s]))
    c.values = np.insert(c.values, idx + 1, v[o, 0])
    c.dvalues = np.insert(c.dvalues, idx + 1, v[o + 1, 0])
    for a in c.anchors:
        if a.index > idx:
            a.index += 1
    runs = []
    for start, col in c.color_runs:
        runs.append((start + 1 if start > idx else start, col))
    c.color_runs = runs
    return idx + 1


def _solve_value(spec, order: int, s0: complex, target: complex, maxiter: int = 40):
    """Newton for F(s) = target, F = f^(order)."""
    s = s0
    for _ in range(maxiter):
        v, _ = evaluate_grid(spec, np.array([s]))
        F, dF = complex(v[order, 0]), complex(v[order + 1, 0])
        if dF == 0:
            return None
        d = (F - target) / dF
        s -= d
        if abs(d) < 1e-14 * (1 + abs(s)):
            return s
    return s


def mark_real_values(c: TracedCurve, spec, values=(0.0, 1.0, -1.0)):
    """Insert anchors where a real-axis pre-image takes the given real values (zeros, u-points)."""
    if c.levelset.kind != "ImZero":
        return c
    kinds = {0.0: "zero-on-curve", 1.0: "f-equals-1", -1.0: "f-equals-minus-1"}
    o = SOURCES[c.source]
    for val in values:
        if c.source == "f-prime" and val != 0.0:
            continue
        i = 0
        while i < c.points.size - 1:
            a, b = c.values[i].real - val, c.values[i + 1].real - val
            if a == 0 and i > 0:
                c.anchors.append(MarkedPoint(c.points[i], kinds[val], abs(c.values[i] - val), i))
            elif a * b < 0:
                guess = c.points[i] + (c.points[i + 1] - c.points[i]) * a / (a - b)
                s = _solve_value(spec, o, guess, val)
                if s is not None and abs(s - guess) < 2 * abs(c.points[i + 1] - c.points[i]) + 1e-12:
                    j = _insert(c, i, s, spec)
                    c.anchors.append(MarkedPoint(s, kinds[val], abs(c.values[j] - val), j))
                    i = j
            i += 1
    c.anchors.sort(key=lambda a: a.index)
    return c


def color_segments(c: TracedCurve, spec) -> TracedCurve:
    """Colour runs by the sign of Re F: 1/2 for f, 3/4 for f'.

    On real-axis pre-images ``color_runs`` lists ``(start index, color)`` runs
    whose boundaries sit exactly on inserted zero markers.  On circle
    pre-images it lists the crossings of the real-axis pre-image as
    ``(index, color)`` events.
    """
    c.ensure_values(spec)
    pos, neg = COLOR_OF[(c.source, 1)], COLOR_OF[(c.source, -1)]
    if c.levelset.kind == "ImZero":
        if not any(a.kind == "zero-on-curve" for a in c.anchors):
            mark_real_values(c, spec, (0.0,))
        zero_idx = sorted(a.index for a in c.anchors if a.kind == "zero-on-curve")
        bounds = [0] + zero_idx + [c.points.size - 1]
        runs = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi <= lo and lo != 0:
                continue
            mid = c.values[(lo + hi) // 2 if hi > lo else lo]
            if hi > lo + 1:
                mid = c.values[lo + 1: hi].real
                mid = float(np.median(mid))
            else:
                mid = float(np.real(mid))
            col = pos if mid > 0 else neg
            if not runs or runs[-1][1] != col:
                runs.append((lo, col))
        c.color_runs = runs
        return c
    # circle pre-image: crossings of Im F = 0
    o = SOURCES[c.source]
    r = c.levelset.r
    events = []
    i = 0
    while i < c.points.size - 1:
        a, b = c.values[i].imag, c.values[i + 1].imag
        if a * b < 0:
            sign = 1 if (c.values[i].real + c.values[i + 1].real) > 0 else -1
            guess = c.points[i] + (c.points[i + 1] - c.points[i]) * a / (a - b)
            s = _solve_value(spec, o, guess, sign * r)
            if s is not None and abs(s - guess) < 2 * abs(c.points[i + 1] - c.points[i]) + 1e-12:
                j = _insert(c, i, s, spec)
                kind = "f-equals-1" if sign > 0 else "f-equals-minus-1"
                if not (abs(r - 1) < 1e-12 and c.source == "f"):
                    kind = "real-crossing"
                c.anchors.append(MarkedPoint(s, kind, abs(c.values[j].imag), j))
                events.append((j, pos if sign > 0 else neg))
                i = j
        i += 1
    c.color_runs = events
    c.anchors.sort(key=lambda a: a.index)
    return c


def alternation_violations(c: TracedCurve) -> list:
    """Consecutive crossings of the same colour along a circle pre-image."""
    ev = c.color_runs
    bad = []
    pairs = list(zip(ev[:-1], ev[1:]))
    if c.closed and len(ev) > 1:
        pairs.append((ev[-1], ev[0]))
    for (i, a), (j, b) in pairs:
        if a == b:
            bad.append((c.points[i], c.points[j], a))
    return bad


def find_horizontal_tangents(c: TracedCurve, spec) -> list:
    """Points of a real-axis pre-image where the tangent is horizontal.

    Sign changes of ``Im`` of the discrete tangent are located, the arc is
    re-traced locally at a tenth of the step and the point is refined by
    Newton on ``Im F = 0, Im F' = 0``.
    """
    if c.points.size < 3:
        return []
    d = np.diff(c.points)
    im = d.imag
    out = []
    o = SOURCES[c.source]
    for i in np.nonzero(im[:-1] * im[1:] < 0)[0]:
        s = _refine_horizontal(spec, o, c.points[i + 1])
        if s is None or abs(s - c.points[i + 1]) > 3 * (abs(d[i]) + abs(d[i + 1])):
            continue
        v, _ = evaluate_grid(spec, np.array([s]))
        dF = complex(v[o + 1, 0])
        defect = abs(dF.imag) / max(abs(dF), 1e-300)
        out.append(MarkedPoint(s, "horizontal-tangent", defect, int(i + 1), c.id))
    return out


def _third(spec, order, s):
    """F, F', F'' for F = f^(order) with order <= 1 (f''' by central differences)."""
    if order == 0:
        v, _ = evaluate_grid(spec, np.array([s]))
        return complex(v[0, 0]), complex(v[1, 0]), complex(v[2, 0])
    h = 1e-4
    v, _ = evaluate_grid(spec, np.array([s, s + h, s - h]))
    return complex(v[1, 0]), complex(v[2, 0]), complex((v[2, 1] - v[2, 2]) / (2 * h))


def _refine_horizontal(spec, order, s0, maxiter=30):
    """Newton on the real system Im F = 0, Im F' = 0."""
    s = complex(s0)
    for _ in range(maxiter):
        F, dF, d2F = _third(spec, order, s)
        r = np.array([F.imag, dF.imag])
        J = np.array([[dF.imag, dF.real], [d2F.imag, d2F.real]])
        try:
            dx, dy = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        s += complex(dx, dy)
        if math.hypot(dx, dy) < 1e-14 * (1 + abs(s)):
            return s
    return s


# ---------------------------------------------------------------------------
# strips and classification
# ---------------------------------------------------------------------------

def _prime_crossings(spec, sigma: float, t0: float, t1: float, h: float = 0.01) -> np.ndarray:
    """Heights in (t0, t1) where the vertical line Re s = sigma meets the pre-image of (1, +inf)."""
    if t1 <= t0:
        return np.zeros(0)
    n = max(64, int(math.ceil((t1 - t0) / h)))
    t = np.linspace(t0, t1, n + 1)
    v, _ = evaluate_grid(spec, sigma + 1j * t)
    F = v[0]
    im = F.imag
    out = []
    for i in np.nonzero(im[:-1] * im[1:] < 0)[0]:
        a, b = im[i], im[i + 1]
        tc = t[i] + (t[i + 1] - t[i]) * a / (a - b)
        w, _ = evaluate_grid(spec, np.array([sigma + 1j * tc]))
        if w[0, 0].real > 1:
            out.append(tc)
    return np.array(out)


def _strip_of_height(spec, sigma: float, t: float, real_axis_symmetric: bool) -> int:
    """Strip index of the point sigma + i t from the Gamma' crossings between the real axis and t."""
    eps = 1e-7
    if t > 0:
        return int(_prime_crossings(spec, sigma, eps, t).size)
    return -int(_prime_crossings(spec, sigma, t, -eps).size)


def _crossings_below(curve: TracedCurve, p: complex) -> int:
    """Number of times the downward vertical ray from p crosses the polyline."""
    P = curve.points
    x = P.real
    a, b = x[:-1], x[1:]
    straddle = ((a <= p.real) & (b > p.real)) | ((b <= p.real) & (a > p.real))
    idx = np.nonzero(straddle)[0]
    cnt = 0
    for i in idx:
        t = (p.real - x[i]) / (x[i + 1] - x[i])
        y = P[i].imag + t * (P[i + 1].imag - P[i].imag)
        if y < p.imag:
            cnt += 1
    return cnt


class StripMap:
    """Locates points relative to the traced Gamma' curves of a window."""

    def __init__(self, spec, window: GridWindow, primes: list):
        self.spec = spec
        self.window = window
        self.primes = primes  # sorted (k, curve) for Gamma' curves crossing the right edge

    def strip_of(self, p: complex) -> int | None:
        spanning = [(k, c) for k, c in self.primes if set(c.ends) == {"left", "right"}]
        if spanning:
            below = [k for k, c in spanning if _crossings_below(c, p) % 2 == 1]
            if below:
                return max(below)
            return min(k for k, _ in spanning) - 1
        if not self.window.contains(p):
            return None
        return _strip_of_height(self.spec, self.window.sigma_max, p.imag,
                                getattr(self.spec, "real_coefficients", False))


def _right_end(c: TracedCurve):
    for end, pt, val in ((c.ends[0], c.points[0], c.values[0]), (c.ends[1], c.points[-1], c.values[-1])):
        if end == "right":
            return pt, val
    return None, None


def _dist_to_curve(p: complex, c: TracedCurve) -> float:
    P = c.points
    if P.size == 1:
        return abs(p - P[0])
    a, b = P[:-1], P[1:]
    d = b - a
    dd = np.abs(d) ** 2
    t = np.clip(np.where(dd > 0, ((p - a) * np.conj(d)).real / np.where(dd > 0, dd, 1), 0), 0, 1)
    return float(np.min(np.abs(p - (a + t * d))))


def curve_distance(p: complex, c: TracedCurve) -> float:
    return _dist_to_curve(p, c)


def classify_components(spec, curves_f: list, curves_fp: list, zeros_f: list, zeros_fp: list,
                        window: GridWindow, tol: float = 1e-6):
    """Fill curve classes and build strip records.

    Returns ``(curves_f, curves_fp, strips)``.  Truncated curves whose image
    does not identify them are left Unknown.
    """
    for c in curves_f + curves_fp:
        c.ensure_values(spec)
        if c.levelset.kind == "ImZero":
            mark_real_values(c, spec)
        color_segments(c, spec)
    sigma_r = window.sigma_max
    real_sym = getattr(spec, "real_coefficients", False)
    # Gamma' curves crossing the right edge
    primes = []
    for c in curves_f:
        if c.levelset.kind != "ImZero":
            continue
        F = c.values.real
        if c.ends_at_pole:
            c.classification = CurveClass("Unknown", reason="ends at the pole")
            continue
        pt, val = _right_end(c)
        if np.all(F > 1) and pt is not None:
            k = _strip_of_height(spec, sigma_r, pt.imag + 1e-9 * np.sign(pt.imag or 1), real_sym)
            if pt.imag < 0:
                k = -len(_prime_crossings(spec, sigma_r, pt.imag + 1e-7, -1e-7))
            c.classification = CurveClass("GammaPrime", k=k)
            primes.append((k, c))
    primes.sort(key=lambda kc: kc[0])
    smap = StripMap(spec, window, primes)
    # zeros to strips
    for z in zeros_f + zeros_fp:
        z.strip = smap.strip_of(z.location)
        z.on_curves = []
    for c in curves_f + curves_fp:
        if c.levelset.kind != "ImZero":
            continue
        zl = zeros_f if c.source == "f" else zeros_fp
        for z in zl:
            if _dist_to_curve(z.location, c) <= tol:
                z.on_curves.append(c.id)
    # remaining f curves
    for c in curves_f:
        if c.levelset.kind != "ImZero" or c.classification.kind != "Unknown" or c.ends_at_pole:
            continue
        F = c.values.real
        pt, val = _right_end(c)
        if pt is not None and np.all(F < 1) and val.real < 1:
            c.classification = CurveClass("GammaZero", k=smap.strip_of(pt - 1e-9))
        elif pt is None and F.min() < 1 < F.max() and F.min() < 0 and set(c.ends) <= {"left"}:
            zs = [a.location for a in c.anchors if a.kind == "zero-on-curve"]
            k = smap.strip_of(zs[0]) if zs else smap.strip_of(c.points[c.points.size // 2])
            c.classification = CurveClass("GammaJ", k=k)
        else:
            c.classification = CurveClass("Unknown", reason="truncated or insufficient image evidence")
    # j indices from the vertical order of zeros inside each strip
    by_strip = {}
    for c in curves_f:
        cl = c.classification
        if cl.kind in ("GammaZero", "GammaJ") and cl.k is not None:
            zs = [a.location for a in c.anchors if a.kind == "zero-on-curve"]
            if len(zs) == 1:
                by_strip.setdefault(cl.k, []).append((zs[0].imag, c))
    for k, lst in by_strip.items():
        lst.sort(key=lambda x: x[0])
        zero_pos = [i for i, (_, c) in enumerate(lst) if c.classification.kind == "GammaZero"]
        if len(zero_pos) == 1:
            for i, (_, c) in enumerate(lst):
                c.classification.j = i - zero_pos[0]
            for _, c in lst:
                if c.classification.kind == "GammaJ" and c.classification.j == 0:
                    c.classification.kind = "Unknown"
                    c.classification.reason = "j-index clash with the GammaZero curve"
        else:
            for _, c in lst:
                if c.classification.kind == "GammaZero":
                    c.classification.j = 0
    # f' curves
    for c in curves_fp:
        if c.levelset.kind != "ImZero":
            continue
        F = c.values.real
        pt, val = _right_end(c)
        if c.ends_at_pole:
            c.classification = CurveClass("Unknown", reason="ends at the pole")
        elif pt is not None and np.all(F < 0):
            near = min(primes, key=lambda kc: abs(_right_end(kc[1])[0].imag - pt.imag), default=None)
            k = near[0] if near is not None else smap.strip_of(pt - 1e-9)
            c.classification = CurveClass("UpsilonPrime", k=k)
        elif pt is not None and np.all(F > 0):
            c.classification = CurveClass("UpsilonZero", k=smap.strip_of(pt - 1e-9))
        elif pt is None and F.min() < 0 < F.max() and set(c.ends) <= {"left"}:
            zs = [a.location for a in c.anchors if a.kind == "zero-on-curve"]
            k = smap.strip_of(zs[0]) if zs else None
            partner = [g for g in curves_f if g.classification.kind == "GammaJ" and g.classification.k == k]
            j = None
            if partner:
                best = min(partner, key=lambda g: float(np.min(np.abs(g.points[:, None] - c.points[None, ::8]))))
                j = best.classification.j
            c.classification = CurveClass("UpsilonJ", k=k, j=j)
        else:
            c.classification = CurveClass("Unknown", reason="truncated or insufficient image evidence")
    # strip records
    strips = []
    ks = [k for k, _ in primes]
    spans = {k: set(c.ends) == {"left", "right"} for k, c in primes}
    ids = {k: c.id for k, c in primes}
    cand = sorted(set(ks) | {k - 1 for k in ks})
    if not ks:
        cand = sorted({smap.strip_of(complex(window.sigma_max, 0.5 * (window.t_min + window.t_max)))} - {None})
    for k in cand:
        lower, upper = ids.get(k), ids.get(k + 1)
        complete = bool(lower and upper and spans[k] and spans[k + 1])
        zf = [z for z in zeros_f if z.strip == k]
        zp = [z for z in zeros_fp if z.strip == k]
        J = sorted({c.classification.j for c in curves_f
                    if c.classification.kind in ("GammaZero", "GammaJ") and c.classification.k == k
                    and c.classification.j is not None})
        strips.append(StripRecord(k, lower, upper, sum(z.order for z in zf), J, k == 0, complete,
                                  [z.id for z in zf], [z.id for z in zp]))
    return curves_f, curves_fp, strips


# ---------------------------------------------------------------------------
# Eq-(4)-type invariant along real-axis pre-images
# ---------------------------------------------------------------------------

def inverse_derivative_defect(spec, c: TracedCurve, delta: float = 1e-3, exclude=(), exclude_radius: float = 0.0):
    """max |F'(s(x)) s'(x) - 1| along a real-axis pre-image, s' by central differences in x = F(s).

    The neighbours s(x +- dx) are recomputed on the level set at arclength
    ``delta``; points within ``exclude_radius`` of ``exclude`` are skipped.
    """
    o = SOURCES[c.source]
    c.ensure_values(spec)
    worst = 0.0
    worst_at = None
    ex = np.asarray(list(exclude), dtype=complex)
    for s, F, dF in zip(c.points, c.values, c.dvalues):
        if ex.size and np.min(np.abs(ex - s)) < exclude_radius:
            continue
        if abs(dF) < 1e-12:
            continue
        dx = delta * abs(dF)
        x = F.real
        sp = _solve_value(spec, o, s + dx / dF, x + dx)
        sm = _solve_value(spec, o, s - dx / dF, x - dx)
        if sp is None or sm is None:
            continue
        sprime = (sp - sm) / (2 * dx)
        d = abs(dF * sprime - 1)
        if d > worst:
            worst, worst_at = d, s
    return worst, worst_at


# ---------------------------------------------------------------------------
# gamma_r fusion
# ---------------------------------------------------------------------------

@dataclass
class FusionResult:
    r: float
    component_count: int
    fused: bool
    crossings: dict
    far_reaching: list

    def to_dict(self) -> dict:
        return {"r": self.r, "component_count": self.component_count, "fused": self.fused,
                "crossings": {k: sorted(v) for k, v in self.crossings.items()},
                "far_reaching": list(self.far_reaching)}


def _segments_cross(P: np.ndarray, Q: np.ndarray) -> bool:
    """Whether two polylines intersect (bounding-box prefilter, then exact segment tests)."""
    if P.size < 2 or Q.size < 2:
        return False
    if (P.real.max() < Q.real.min() or Q.real.max() < P.real.min() or
            P.imag.max() < Q.imag.min() or Q.imag.max() < P.imag.min()):
        return False
    tree = cKDTree(np.column_stack([Q.real, Q.imag]))
    seg = np.abs(np.diff(P)).max() + np.abs(np.diff(Q)).max()
    for i in range(P.size - 1):
        for j in tree.query_ball_point([P[i].real, P[i].imag], seg):
            for jj in (j - 1, j):
                if jj < 0 or jj + 1 >= Q.size:
                    continue
                if _seg_intersect(P[i], P[i + 1], Q[jj], Q[jj + 1]):
                    return True
    return False


def _seg_intersect(a, b, c, d) -> bool:
    def cross(u, v):
        return u.real * v.imag - u.imag * v.real
    d1, d2 = cross(b - a, c - a), cross(b - a, d - a)
    d3, d4 = cross(d - c, a - c), cross(d - c, b - c)
    return d1 * d2 < 0 and d3 * d4 < 0


def gamma_r_fusion_scan(spec, window: GridWindow, r_list, prime_curves: list, step: float | None = None,
                        reach_sigma: float | None = None) -> list:
    """Circle pre-images for radii straddling 1: far-reaching components and the Gamma' curves they cross.

    A component is far-reaching when it reaches beyond ``reach_sigma`` (default:
    the midpoint between sigma_eps(1/2) and the smallest turning abscissa
    sigma_eps(|1 - r|) over the scanned radii).  For r < 1 each far-reaching
    component should stay inside one strip; past r = 1 they fuse into one
    curve crossing every Gamma'.
    """
    from .series import uniform_limit_threshold

    r_list = [float(r) for r in r_list]
    if any(b <= a for a, b in zip(r_list[:-1], r_list[1:])):
        raise ValueError("r_list must be increasing")
    if reach_sigma is None:
        turning = min(uniform_limit_threshold(spec, min(abs(1 - r), 0.99)) for r in r_list if r != 1)
        reach_sigma = 0.5 * (uniform_limit_threshold(spec, 0.5) + turning)
    out = []
    for r in r_list:
        curves = trace_level_set(spec, "f", LevelSet("AbsEq", r), window, step)
        far = [c for c in curves if c.points.real.max() >= reach_sigma]
        if any("right" in c.ends for c in far):
            raise errors.ResolutionInsufficient(f"r = {r}: a far-reaching component leaves through the right edge")
        crossings = {}
        for c in far:
            crossings[c.id] = [pc.id for _, pc in prime_curves if _segments_cross(c.points, pc.points)]
        complete = [c for c in far if not ({"top", "bottom"} & set(c.ends))]
        fused = len(far) == 1 and len(crossings[far[0].id]) == len(prime_curves) and len(prime_curves) > 0
        for c in curves:
            c.classification = CurveClass("CircleComponent", r=r, bounded=not c.truncated,
                                          fused_gamma_r=fused and c in far)
        count = len(complete) if not fused else 1
        out.append(FusionResult(r, count, fused, crossings, [c.id for c in far]))
    return out


# ---------------------------------------------------------------------------
# distances and intersections
# ---------------------------------------------------------------------------

def distance_to_curve(spec, p: complex, c: TracedCurve) -> float:
    """Distance from p to the component c of the level set.

    The polyline distance is used far away; near the polyline p is projected
    onto the exact level set, which removes the chord error of the polyline.
    """
    d_poly = _dist_to_curve(p, c)
    h = c.step or (float(np.max(np.abs(np.diff(c.points)))) if c.points.size > 1 else 0.0)
    if d_poly > 2 * h or h == 0:
        return d_poly
    lv = _Level(spec, c.source, c.levelset)
    F, dF, ph, g = lv.point(p)
    if not math.isfinite(ph):
        return d_poly
    if abs(g) == 0:
        return 0.0 if abs(ph) <= DEFECT_TOL * lv.scale(np.array([F]))[0] else d_poly
    res = _project(lv, p, max_move=2 * h)
    if res is None:
        return d_poly
    q = res[0]
    if _dist_to_curve(q, c) > 2 * h:
        return d_poly
    return abs(p - q)


def nearest_curve(spec, p: complex, curves: list, radius: float):
    """(curve, distance) of the closest curve whose polyline passes within ``radius`` of p."""
    best, best_d = None, math.inf
    for c in curves:
        if _dist_to_curve(p, c) > radius:
            continue
        d = distance_to_curve(spec, p, c)
        if d < best_d:
            best, best_d = c, d
    return best, best_d


def level_point_derivative(spec, c: TracedCurve, s: complex, delta: float = 1e-3):
    """s'(x) at a point of a real-axis pre-image, by central differences in x = F(s)."""
    o = SOURCES[c.source]
    v, _ = evaluate_grid(spec, np.array([s]))
    F, dF = complex(v[o, 0]), complex(v[o + 1, 0])
    dx = delta * abs(dF)
    sp = _solve_value(spec, o, s + dx / dF, F.real + dx)
    sm = _solve_value(spec, o, s - dx / dF, F.real - dx)
    if sp is None or sm is None:
        return None
    return (sp - sm) / (2 * dx)
