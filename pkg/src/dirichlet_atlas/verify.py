"""Executable checks of the geometric statements over traced curves and located zeros.

Every check returns a :class:`CheckReport` with a verdict, the margin to a
violation and witnesses.  Fail verdicts always carry the offending points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .series import evaluate_grid, uniform_limit_threshold
from .tracing import (
    LevelSet,
    alternation_violations,
    classify_components,
    distance_to_curve,
    find_horizontal_tangents,
    inverse_derivative_defect,
    level_point_derivative,
    nearest_curve,
    trace_level_set,
)
from .window import GridWindow
from .zeros import locate_zeros, zero_order

DIST_TOL = 1e-5
ANGLE_TOL = 1e-3
SPEISER_TOL = 1e-6

PAIRS = {"GammaPrime": "UpsilonPrime", "GammaZero": "UpsilonZero", "GammaJ": "UpsilonJ"}
ALLOWED_MATCH = {(1, 4), (2, 3)}


@dataclass
class CheckReport:
    name: str
    verdict: str  # pass | fail | inconclusive
    margin: float
    witnesses: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    window: tuple | None = None
    spec_id: str = ""
    reason: str = ""

    def __post_init__(self):
        if self.verdict not in ("pass", "fail", "inconclusive"):
            raise ValueError(f"bad verdict {self.verdict!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "margin": _finite(self.margin),
                "witnesses": [_jsonable(w) for w in self.witnesses], "tolerances": dict(self.tolerances),
                "window": list(self.window) if self.window else None, "spec_id": self.spec_id,
                "reason": self.reason}

    @classmethod
    def from_dict(cls, d):
        m = d["margin"]
        return cls(d["name"], d["verdict"], math.inf if m is None else m, d["witnesses"], d["tolerances"],
                   tuple(d["window"]) if d["window"] else None, d["spec_id"], d["reason"])

    def line(self) -> str:
        return f"{self.verdict.upper():12s} {self.name:34s} margin={self.margin:.3g} {self.reason}"


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _jsonable(w):
    if isinstance(w, complex):
        return [w.real, w.imag]
    if isinstance(w, dict):
        return {k: _jsonable(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [_jsonable(v) for v in w]
    if isinstance(w, np.generic):
        return w.item()
    return w


def _verdict(fail: bool, inconclusive: bool) -> str:
    return "fail" if fail else ("inconclusive" if inconclusive else "pass")


def _f_real_curves(curves):
    return [c for c in curves if c.source == "f" and c.levelset.kind == "ImZero"]


# ---------------------------------------------------------------------------
# zeros on Gamma' curves
# ---------------------------------------------------------------------------

def check_no_zero_on_gamma_prime(spec, curves, zeros_f, zeros_fp, tol: float = DIST_TOL) -> CheckReport:
    """No zero of f or f' lies on a Gamma' curve."""
    primes = [c for c in _f_real_curves(curves) if c.classification.kind == "GammaPrime"]
    unknown_hi = [c for c in _f_real_curves(curves)
                  if c.classification.kind == "Unknown" and not c.ends_at_pole
                  and c.values is not None and np.all(c.values.real > 1)]
    tols = {"distance": tol}
    if not primes:
        return CheckReport("no_zero_on_gamma_prime", "inconclusive", math.inf, [], tols,
                           reason="no classified Gamma' curve in the window")
    margin, witnesses = math.inf, []
    for z in list(zeros_f) + list(zeros_fp):
        for c in primes:
            d = distance_to_curve(spec, z.location, c)
            margin = min(margin, d)
            if d <= tol:
                witnesses.append({"zero": z.location, "target": z.target, "curve": c.id, "distance": d})
    reason = f"{len(unknown_hi)} truncated curve(s) with image in (1, inf) not classified" if unknown_hi else ""
    return CheckReport("no_zero_on_gamma_prime", _verdict(bool(witnesses), False), margin, witnesses, tols,
                       reason=reason)


def check_no_fprime_zero_on_gamma_j(spec, curves, zeros_f, zeros_fp, tol: float = DIST_TOL) -> CheckReport:
    """A zero of f' on a Gamma_{k,j} curve must be a double zero of f.

    Curves classified Gamma_{k,0} or Gamma_{k,j} are examined, together with
    truncated real-axis pre-images left Unknown (except those ending at the
    pole), since truncation alone must not hide a violation.  Zeros of f'
    in the strip S_0 are not tested.
    """
    cands = [c for c in _f_real_curves(curves)
             if c.classification.kind in ("GammaZero", "GammaJ")
             or (c.classification.kind == "Unknown" and not c.ends_at_pole)]
    doubles = [z.location for z in zeros_f if z.order == 2]
    margin, witnesses, exempt = math.inf, [], 0
    # the statement concerns strips S_k with k != 0; S_0 holds the real axis itself
    for v in (z for z in zeros_fp if z.strip != 0):
        for c in cands:
            d = distance_to_curve(spec, v.location, c)
            if d <= tol and any(abs(v.location - w) <= tol for w in doubles):
                exempt += 1
                continue
            margin = min(margin, d)
            if d <= tol:
                witnesses.append({"fprime_zero": v.location, "curve": c.id, "class": c.classification.label,
                                  "distance": d})
    reason = f"{exempt} double-zero coincidence(s) exempt" if exempt else ""
    return CheckReport("no_fprime_zero_on_gamma_j", _verdict(bool(witnesses), False), margin, witnesses,
                       {"distance": tol}, reason=reason)


# ---------------------------------------------------------------------------
# Speiser-type bound and double zeros
# ---------------------------------------------------------------------------

def check_speiser_bound(zeros_f, zeros_fp, strips, tol: float = SPEISER_TOL,
                        critical_line: float | None = None) -> CheckReport:
    """In every complete strip with k != 0, min Re over f'-zeros >= min Re over f-zeros - tol.

    With ``critical_line`` set, additionally every f'-zero outside S_0 must
    satisfy ``Re >= critical_line - tol`` (the critical-line form).  S_0 holds the
    real f'-zeros between trivial zeros, which that form does not cover.
    """
    margin, witnesses = math.inf, []
    checked = 0
    byid = {z.id: z for z in list(zeros_f) + list(zeros_fp)}
    for st in strips:
        if not st.complete or st.k == 0:
            continue
        fz = [byid[i] for i in st.zero_ids if i in byid]
        vz = [byid[i] for i in st.branch_ids if i in byid]
        if not vz or not fz:
            continue
        checked += 1
        slack = min(v.location.real for v in vz) - min(z.location.real for z in fz)
        margin = min(margin, slack + tol)
        if slack < -tol:
            worst = min(vz, key=lambda v: v.location.real)
            witnesses.append({"strip": st.k, "fprime_zero": worst.location, "slack": slack})
    if critical_line is not None:
        for v in zeros_fp:
            if v.strip == 0:
                continue
            slack = v.location.real - critical_line
            margin = min(margin, slack + tol)
            if slack < -tol:
                witnesses.append({"fprime_zero": v.location, "critical_line_slack": slack})
    reason = "" if checked else "no complete strip with both zero sets (vacuous)"
    return CheckReport("speiser_bound", _verdict(bool(witnesses), False), margin, witnesses,
                       {"tol": tol, "critical_line": critical_line}, reason=reason)


def check_double_zero_geometry(spec, zeros_f, curves, tol: float = DIST_TOL) -> CheckReport:
    """At most one double zero per strip, each on a Gamma_{k,0} and on a Gamma_{k,+-1}."""
    doubles = [z for z in zeros_f if z.order == 2]
    witnesses = []
    per_strip = {}
    for z in doubles:
        per_strip.setdefault(z.strip, []).append(z)
    for k, lst in per_strip.items():
        if len(lst) > 1:
            witnesses.append({"strip": k, "double_zeros": [z.location for z in lst], "problem": "more than one"})
    margin = math.inf
    inconclusive = False
    for z in doubles:
        f_curves = _f_real_curves(curves)
        on0 = [c for c in f_curves if c.classification.kind == "GammaZero"
               and distance_to_curve(spec, z.location, c) <= tol]
        on1 = [c for c in f_curves if c.classification.kind == "GammaJ" and c.classification.j in (1, -1)
               and distance_to_curve(spec, z.location, c) <= tol]
        unknown = [c for c in f_curves if c.classification.kind == "Unknown"
                   and distance_to_curve(spec, z.location, c) <= tol]
        if not (on0 and on1):
            if unknown:
                inconclusive = True
            else:
                witnesses.append({"double_zero": z.location, "on_gamma_zero": bool(on0),
                                  "on_gamma_pm1": bool(on1)})
    reason = "vacuous: no double zero" if not doubles else ""
    if inconclusive and not witnesses:
        reason = "double zero lies on curves left Unknown"
    return CheckReport("double_zero_geometry", _verdict(bool(witnesses), inconclusive), margin, witnesses,
                       {"distance": tol}, reason=reason)


# ---------------------------------------------------------------------------
# intertwining points and the colour rules
# ---------------------------------------------------------------------------

@dataclass
class Intersection:
    location: complex
    gamma: str
    upsilon: str | None
    gamma_class: str
    upsilon_class: str
    level_distance: float
    gamma_color: int
    upsilon_color: int
    angle_defect: float | None


def intertwining_points(spec, curves_f, curves_fp) -> list:
    """Horizontal tangents of real-axis pre-images of f, each with the f'-curve through it."""
    out = []
    fcurves = _f_real_curves(curves_f)
    ucurves = [c for c in curves_fp if c.levelset.kind == "ImZero"]
    for c in fcurves:
        if c.ends_at_pole:
            continue
        for m in find_horizontal_tangents(c, spec):
            s0 = m.location
            v, _ = evaluate_grid(spec, np.array([s0]))
            f0, f1, f2 = complex(v[0, 0]), complex(v[1, 0]), complex(v[2, 0])
            lvl = abs(f1.imag) / max(abs(f2), 1e-300)
            h = max(c.step, 1e-3)
            u, _ = nearest_curve(spec, s0, ucurves, 3 * h)
            sp = level_point_derivative(spec, c, s0)
            ang = None
            if sp is not None:
                a = np.angle(f1) + np.angle(sp)
                ang = abs((a + math.pi) % (2 * math.pi) - math.pi)
            out.append(Intersection(s0, c.id, u.id if u else None, c.classification.label,
                                    u.classification.label if u else "none", lvl,
                                    1 if f0.real > 0 else 2, 3 if f1.real > 0 else 4, ang))
    return out


def _kind(label: str) -> str:
    return label.split("(")[0]


def _index(label: str) -> str:
    return label[label.find("("):] if "(" in label else ""


def check_intertwining(spec, curves_f, curves_fp, tol: float = DIST_TOL, angle_tol: float = ANGLE_TOL,
                       points: list | None = None) -> CheckReport:
    """Horizontal tangents of Gamma curves lie on the paired Upsilon curve; angle identity holds there."""
    pts = intertwining_points(spec, curves_f, curves_fp) if points is None else points
    witnesses, margin, unknown = [], math.inf, 0
    for p in pts:
        gk = _kind(p.gamma_class)
        if gk == "Unknown" or p.upsilon is None and p.level_distance <= tol:
            unknown += p.upsilon is None or gk == "Unknown"
        problems = []
        if p.level_distance > tol:
            problems.append("no f'-curve through the horizontal tangent")
        if p.angle_defect is None:
            unknown += 1
        else:
            margin = min(margin, angle_tol - p.angle_defect)
            if p.angle_defect > angle_tol:
                problems.append("angle identity violated")
        uk = _kind(p.upsilon_class)
        if gk in PAIRS and uk not in ("Unknown", "none"):
            if PAIRS[gk] != uk or _index(p.gamma_class) != _index(p.upsilon_class):
                problems.append("pairing violates the taxonomy")
        elif gk != "Unknown":
            unknown += 1
        if problems:
            witnesses.append({"point": p.location, "gamma": p.gamma, "upsilon": p.upsilon,
                              "classes": [p.gamma_class, p.upsilon_class], "problems": problems})
    reason = f"{len(pts)} horizontal tangent(s)"
    if unknown:
        reason += f"; {unknown} involve unclassified curves"
    return CheckReport("intertwining", _verdict(bool(witnesses), False), margin, witnesses,
                       {"distance": tol, "angle": angle_tol}, reason=reason)


def check_color_rules(spec, circle_curves, curves_f=(), curves_fp=(), points: list | None = None) -> CheckReport:
    """Alternating rule on circle pre-images and matching rule at intertwining points.

    The pair Gamma_{k,0}, Upsilon_{k,0} is exempt from the matching rule.
    """
    witnesses = []
    n_events = 0
    for c in circle_curves:
        n_events += len(c.color_runs)
        for a, b, col in alternation_violations(c):
            witnesses.append({"rule": "alternating", "curve": c.id, "points": [a, b], "color": col})
    if points is None and (curves_f or curves_fp):
        points = intertwining_points(spec, curves_f, curves_fp)
    n_match = 0
    for p in points or []:
        gk, uk = _kind(p.gamma_class), _kind(p.upsilon_class)
        if gk == "Unknown" or uk in ("Unknown", "none"):
            continue
        if gk == "GammaZero" and uk == "UpsilonZero":
            continue
        n_match += 1
        if (p.gamma_color, p.upsilon_color) not in ALLOWED_MATCH:
            witnesses.append({"rule": "matching", "point": p.location, "classes": [p.gamma_class, p.upsilon_class],
                              "colors": [p.gamma_color, p.upsilon_color]})
    return CheckReport("color_rules", _verdict(bool(witnesses), False), float(-len(witnesses)), witnesses,
                       {}, reason=f"{n_events} circle crossings, {n_match} matching tests")


# ---------------------------------------------------------------------------
# strips extending left and the inverse-derivative identity
# ---------------------------------------------------------------------------

def check_strip_extends_left(spec, curves, window: GridWindow) -> CheckReport:
    """Weak, falsification-only check: Gamma' curves leave the window through its left edge."""
    try:
        s_eps = uniform_limit_threshold(spec, 0.5) if hasattr(spec, "prefix") else -math.inf
    except errors.AtlasError:
        s_eps = -math.inf
    fcurves = _f_real_curves(curves)
    primes = [c for c in fcurves if c.classification.kind == "GammaPrime"]
    if window.sigma_min >= s_eps or not primes:
        return CheckReport("strip_extends_left", "inconclusive", math.inf, [], {},
                           reason="window shows no strip geometry (right of sigma_eps or no Gamma')")
    witnesses, inconclusive = [], False
    for c in primes:
        ends = set(c.ends)
        if "left" in ends:
            continue
        if ends & {"top", "bottom"}:
            inconclusive = True
        else:
            witnesses.append({"curve": c.id, "ends": list(c.ends), "leftmost": complex(c.points[np.argmin(c.points.real)])})
    return CheckReport("strip_extends_left", _verdict(bool(witnesses), inconclusive),
                       float(window.sigma_max - window.sigma_min), witnesses, {},
                       reason="weak check: a bounded window can only falsify")


def check_inverse_derivative(spec, curves, zeros_fp, tol: float = 1e-3, exclude_steps: int = 10) -> CheckReport:
    """f'(s(x)) s'(x) = 1 along real-axis pre-images, away from branch points."""
    worst, at, cid = 0.0, None, None
    for c in _f_real_curves(curves):
        if c.ends_at_pole:
            continue
        d, p = inverse_derivative_defect(spec, c, exclude=[z.location for z in zeros_fp],
                                         exclude_radius=exclude_steps * c.step)
        if d > worst:
            worst, at, cid = d, p, c.id
    wit = [{"point": at, "curve": cid, "defect": worst}] if worst > tol else []
    return CheckReport("inverse_derivative", _verdict(worst > tol, False), tol - worst, wit, {"relative": tol})


# ---------------------------------------------------------------------------
# the suite
# ---------------------------------------------------------------------------

@dataclass
class SuiteConfig:
    radii: tuple = (0.5, 1.0, 2.0)
    distance_tol: float = DIST_TOL
    angle_tol: float = ANGLE_TOL
    speiser_tol: float = SPEISER_TOL
    critical_line: float | None = None
    zero_tol: float = 1e-9


@dataclass
class SuiteResult:
    reports: list
    curves_f: list
    curves_fp: list
    circles: list
    zeros_f: list
    zeros_fp: list
    strips: list


def analyse_window(spec, window: GridWindow, zero_tol: float = 1e-9):
    """Trace both real-axis pre-images, locate zeros of f and f', classify: the common pipeline."""
    zf = locate_zeros(spec, "f", window.box, zero_tol)
    zp = locate_zeros(spec, "f-prime", window.box, zero_tol)
    seeds_f = [z.location for z in zf if window.contains(z.location)]
    seeds_p = [z.location for z in zp if window.contains(z.location)]
    cf = trace_level_set(spec, "f", LevelSet("ImZero"), window, extra_seeds=seeds_f)
    cp = trace_level_set(spec, "f-prime", LevelSet("ImZero"), window, extra_seeds=seeds_p)
    cf, cp, strips = classify_components(spec, cf, cp, zf, zp, window)
    return cf, cp, zf, zp, strips


def run_suite(spec, window: GridWindow, config: SuiteConfig | None = None) -> SuiteResult:
    """Trace, locate, classify and run every check; child errors become inconclusive reports."""
    cfg = config or SuiteConfig()
    reports = []
    try:
        cf, cp, zf, zp, strips = analyse_window(spec, window, cfg.zero_tol)
    except errors.AtlasError as exc:
        rep = CheckReport("pipeline", "inconclusive", math.inf, [], {}, window.box, spec.spec_hash,
                          reason=f"{type(exc).__name__}: {exc}")
        return SuiteResult([rep], [], [], [], [], [], [])
    circles = []
    for r in cfg.radii:
        try:
            cc = trace_level_set(spec, "f", LevelSet("AbsEq", r), window)
            cc += trace_level_set(spec, "f-prime", LevelSet("AbsEq", r), window)
            from .tracing import color_segments

            for c in cc:
                color_segments(c, spec)
            circles += cc
        except errors.AtlasError as exc:
            reports.append(CheckReport(f"trace_circle_{r:g}", "inconclusive", math.inf, [], {},
                                       reason=f"{type(exc).__name__}: {exc}"))
    pts = intertwining_points(spec, cf, cp)
    checks = [
        lambda: check_no_zero_on_gamma_prime(spec, cf, zf, zp, cfg.distance_tol),
        lambda: check_no_fprime_zero_on_gamma_j(spec, cf, zf, zp, cfg.distance_tol),
        lambda: check_speiser_bound(zf, zp, strips, cfg.speiser_tol, cfg.critical_line),
        lambda: check_double_zero_geometry(spec, zf, cf, cfg.distance_tol),
        lambda: check_intertwining(spec, cf, cp, cfg.distance_tol, cfg.angle_tol, points=pts),
        lambda: check_color_rules(spec, circles, points=pts),
        lambda: check_strip_extends_left(spec, cf, window),
    ]
    for chk in checks:
        try:
            rep = chk()
        except errors.AtlasError as exc:
            rep = CheckReport("check", "inconclusive", math.inf, [], {}, reason=f"{type(exc).__name__}: {exc}")
        rep.window = window.box
        rep.spec_id = spec.spec_hash
        reports.append(rep)
    return SuiteResult(reports, cf, cp, circles, zf, zp, strips)


def summary_text(reports) -> str:
    return "\n".join(r.line() for r in reports)
