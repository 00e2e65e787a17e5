"""Local inverses, the involution swapping a paired zero couple, and the argument-term series.

For zeros s1, s2 with Re s1 + Re s2 = 1 and equal heights, the components D1, D2
of the pre-image of a small disc |z| < r are mapped injectively by f.  The map
phi = (f restricted to D2)^-1 o f swaps D1 and D2 and satisfies phi o phi = id and f o phi = f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import errors
from .series import evaluate_grid, primes_up_to
from .zeros import locate_zeros

BRANCH_TOL = 1e-6
PAIR_TOL = 1e-6


def _f01(spec, s: complex):
    v, _ = evaluate_grid(spec, np.array([s]))
    return complex(v[0, 0]), complex(v[1, 0])


def _lift(spec, s0: complex, path: np.ndarray, tol: float, branch_tol: float) -> complex:
    """Continue ``f(s) = path[i]`` from s0 (with f(s0) = path[0]) along a polyline of target values."""
    s = complex(s0)
    _, f1 = _f01(spec, s)
    for a, b in zip(path[:-1], path[1:]):
        # sub-steps keep the predictor within a fraction of the local injectivity scale
        n = 1
        while True:
            ok = True
            z_prev, s_try, f1_try = a, s, f1
            for i in range(1, n + 1):
                z = a + (b - a) * i / n
                s_try = s_try + (z - z_prev) / f1_try
                for _ in range(30):
                    f0, f1_try = _f01(spec, s_try)
                    if abs(f1_try) < branch_tol:
                        raise errors.BranchPointOnPath(f"|f'| = {abs(f1_try):.3g} at {s_try}")
                    d = (f0 - z) / f1_try
                    s_try -= d
                    if abs(d) <= 1e-15 * (1 + abs(s_try)):
                        break
                else:
                    ok = False
                    break
                z_prev = z
            if ok:
                s, f1 = s_try, f1_try
                break
            n *= 2
            if n > 4096:
                raise errors.ComponentTrackingLoss("local inverse continuation diverged")
    f0, _ = _f01(spec, s)
    if abs(f0 - path[-1]) > tol:
        raise errors.ComponentTrackingLoss(f"local inverse residual {abs(f0 - path[-1]):.3g}")
    return s


def local_inverse(spec, anchor_zero: complex, z: complex, tol: float = 1e-12, steps: int = 16,
                  branch_tol: float = BRANCH_TOL) -> complex:
    """Solve ``f(s) = z`` by continuation along the segment 0 -> z from a zero of f."""
    z = complex(z)
    if z == 0:
        return complex(anchor_zero)
    path = z * np.linspace(0.0, 1.0, steps + 1)
    try:
        return _lift(spec, anchor_zero, path, tol, branch_tol)
    except errors.BranchPointOnPath:
        # one detour around the offending point
        w = 0.5 * z * (1 + 0.5j)
        path = np.concatenate([w * np.linspace(0, 1, steps + 1), w + (z - w) * np.linspace(0, 1, steps + 1)[1:]])
        return _lift(spec, anchor_zero, path, tol, branch_tol)


@dataclass
class InvolutionMap:
    spec_id: str
    s1: complex
    s2: complex
    radius: float
    anchors: tuple
    branch_points: list = field(default_factory=list)
    tol: float = 1e-12

    @property
    def fixed_point(self) -> bool:
        return abs(self.s1 - self.s2) <= PAIR_TOL

    def to_dict(self) -> dict:
        return {"spec_id": self.spec_id, "s1": [self.s1.real, self.s1.imag], "s2": [self.s2.real, self.s2.imag],
                "radius": self.radius, "branch_points": [[v.real, v.imag] for v in self.branch_points],
                "H": "union of the pre-image components D1, D2 of the disc |z| < radius"}


def build_involution(spec, s1: complex, s2: complex, search: float = 2.0, tol: float = 1e-12) -> InvolutionMap:
    """Map swapping the paired zeros s1 = sigma + it and s2 = 1 - sigma + it."""
    s1, s2 = complex(s1), complex(s2)
    if abs(s1.real + s2.real - 1) > PAIR_TOL or abs(s1.imag - s2.imag) > PAIR_TOL:
        raise errors.PairingPreconditionFailed(f"{s1} and {s2} are not paired by sigma -> 1 - sigma")
    for s in (s1, s2):
        if abs(_f01(spec, s)[0]) > 1e-8:
            raise errors.PairingPreconditionFailed(f"{s} is not a zero")
    lo, hi = min(s1.real, s2.real), max(s1.real, s2.real)
    box = (lo - search, hi + search, s1.imag - search, s1.imag + search)
    try:
        vs = [z.location for z in locate_zeros(spec, "f-prime", box, 1e-10)]
    except errors.AtlasError as exc:
        raise errors.InjectivityRadiusNotFound(f"branch points around the pair not certified: {exc}") from exc
    # the components must stay inside the searched box, and a component of
    # |f| < r reaches a branch point v only when r > |f(v)|
    rmin = min([_edge_minimum(spec, box)] + [abs(_f01(spec, v)[0]) for v in vs])
    radius = 0.5 * rmin
    if not radius > 0:
        raise errors.InjectivityRadiusNotFound("branch point at a zero")
    m = InvolutionMap(spec.spec_hash, s1, s2, radius, (s1, s2), vs, tol)
    if not m.fixed_point:
        _check_monodromy(spec, m)
    return m


def _edge_minimum(spec, box) -> float:
    x0, x1, y0, y1 = box
    t = np.linspace(0, 1, 400)
    edge = np.concatenate([x0 + (x1 - x0) * t + 1j * y0, x1 + 1j * (y0 + (y1 - y0) * t),
                           x1 - (x1 - x0) * t + 1j * y1, x0 + 1j * (y1 - (y1 - y0) * t)])
    v, _ = evaluate_grid(spec, edge)
    return float(np.abs(v[0]).min())


def _check_monodromy(spec, m: InvolutionMap, n: int = 256):
    """Continuation once around |z| = 0.9 r returns to its start: f is injective on each component."""
    r = 0.9 * m.radius
    circle = r * np.exp(2j * np.pi * np.arange(n + 1) / n)
    for a in m.anchors:
        start = local_inverse(spec, a, circle[0], m.tol)
        end = _lift(spec, start, circle, m.tol, BRANCH_TOL)
        if abs(end - start) > 1e-8:
            raise errors.InjectivityRadiusNotFound(f"monodromy around the disc pre-image at {a}")


def phi(spec, m: InvolutionMap, s: complex, side: int | None = None) -> complex:
    """phi(s): the point of the other component with the same image.  ``side`` is 0 (near s1) or 1."""
    s = complex(s)
    if side is None:
        side = 0 if abs(s - m.s1) <= abs(s - m.s2) else 1
    z, _ = _f01(spec, s)
    if abs(z) >= m.radius:
        raise errors.ComponentTrackingLoss(f"f(s) = {z} outside the disc |z| < {m.radius:.3g}")
    return local_inverse(spec, m.anchors[1 - side], z, m.tol)


def phi_ratio(spec, m: InvolutionMap, s: complex, side: int | None = None, tol: float = 1e-12) -> complex:
    """Phi(s) = f(s) / f(phi(s)), set to 1 at the two zeros (removable singularities)."""
    s = complex(s)
    if abs(s - m.s1) <= tol or abs(s - m.s2) <= tol:
        return 1.0 + 0j
    num, _ = _f01(spec, s)
    den, _ = _f01(spec, phi(spec, m, s, side))
    if abs(den) < 1e-300:
        raise errors.ComponentTrackingLoss(f"denominator underflow at {s}")
    return num / den


def sample_H(spec, m: InvolutionMap, n: int, seed: int = 0):
    """Points of D1 and D2 (alternating) from low-discrepancy samples of the disc image."""
    u = qmc.Halton(2, seed=seed).random(n)
    z = 0.95 * m.radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
    sides = np.arange(n) % 2
    pts = np.array([local_inverse(spec, m.anchors[k], zz, m.tol) for zz, k in zip(z, sides)])
    return pts, sides


def verify_involution(spec, m: InvolutionMap, sample_count: int = 1000, tol: float = 1e-6, seed: int = 0,
                      phi_map=None):
    """Sampled residuals of phi o phi - id, f o phi - f and Phi - 1 over H."""
    from .verify import CheckReport

    phi_map = phi_map or (lambda s, side: phi(spec, m, s, side))
    pts, sides = sample_H(spec, m, sample_count, seed)
    pts = np.concatenate([pts, [m.s1, m.s2]])
    sides = np.concatenate([sides, [0, 1]])
    r_inv = r_val = r_ratio = 0.0
    witnesses = []
    for s, k in zip(pts, sides):
        p = phi_map(s, int(k))
        pp = phi_map(p, 1 - int(k))
        fs, _ = _f01(spec, s)
        fp, _ = _f01(spec, p)
        e1, e2 = abs(pp - s), abs(fp - fs)
        ratio = 1.0 if abs(s - m.s1) < 1e-12 or abs(s - m.s2) < 1e-12 else fs / fp
        e3 = abs(ratio - 1)
        r_inv, r_val, r_ratio = max(r_inv, e1), max(r_val, e2), max(r_ratio, e3)
        if max(e1, e2, e3) > tol and len(witnesses) < 5:
            witnesses.append({"point": complex(s), "phi_phi": e1, "f_phi": e2, "Phi": e3})
    swap = max(abs(phi_map(m.s1, 0) - m.s2), abs(phi_map(m.s2, 1) - m.s1))
    if swap > tol:
        witnesses.append({"swap_defect": swap})
    worst = max(r_inv, r_val, r_ratio, swap)
    return CheckReport("involution", "fail" if witnesses else "pass", tol - worst, witnesses,
                       {"residual": tol}, reason=f"phi o phi: {r_inv:.2g}, f o phi: {r_val:.2g}, "
                                                 f"Phi - 1: {r_ratio:.2g}, swap: {swap:.2g}")


# ---------------------------------------------------------------------------
# argument terms
# ---------------------------------------------------------------------------

@dataclass
class ArgumentTermSeries:
    t: float
    delta: float
    primes: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray
    envelope: np.ndarray
    ramanujan_surrogate: bool

    def envelope_violations(self, skip: int = 10) -> np.ndarray:
        """Primes beyond the first ``skip`` whose term exceeds the decay envelope."""
        bad = np.abs(self.terms[skip:]) > self.envelope[skip:]
        return self.primes[skip:][bad]

    def decay_report(self) -> dict:
        n = self.primes.size
        top = self.primes >= self.primes[-1] / 10 if n else np.zeros(0, bool)
        return {"top_decade_max_term": float(np.abs(self.terms[top]).max()) if top.any() else 0.0,
                "top_decade_envelope": float(self.envelope[top].max()) if top.any() else 0.0,
                "violations": self.envelope_violations().tolist()}

    def to_dict(self) -> dict:
        return {"t": self.t, "delta": self.delta, "primes": self.primes.tolist(), "terms": self.terms.tolist(),
                "partial_sums": self.partial_sums.tolist(), "decay": self.decay_report(),
                "ramanujan_surrogate": self.ramanujan_surrogate}


def argument_terms(spec, t: float, delta: float, prime_bound: int, tol: float = 1e-12) -> ArgumentTermSeries:
    """Angles arg((e^{i lam_p t} - a_p e^{-lam_p delta}) / (e^{i lam_p t} - a_p e^{-lam_p / 2})) over primes."""
    if not spec.multiplicative:
        raise errors.NotMultiplicative(f"{spec.name} has no Euler product")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if prime_bound < 2:
        raise ValueError("prime_bound must be >= 2")
    p = primes_up_to(prime_bound)
    a, lam = spec.prefix(int(p[-1]))
    ap, lp = a[p - 1], lam[p - 1]
    e = np.exp(1j * lp * t)
    num = e - ap * np.exp(-lp * delta)
    den = e - ap * np.exp(-lp * 0.5)
    if np.abs(den).min() < tol:
        i = int(np.argmin(np.abs(den)))
        raise errors.UnitCircleCollision(f"denominator vanishes at p = {p[i]}")
    # arg(num / den) from separate real products: exactly 0 when num == den
    terms = np.arctan2(num.imag * den.real - num.real * den.imag, num.real * den.real + num.imag * den.imag)
    envelope = 4 * np.abs(ap) * np.exp(-lp * min(delta, 0.5))
    mag = np.abs(a) * np.exp(-lam * delta)
    surrogate = bool(mag[-1] < 1e-8 and np.all(np.diff(mag[mag > 0]) <= 0))
    return ArgumentTermSeries(float(t), float(delta), p, terms, np.cumsum(terms), envelope, surrogate)
