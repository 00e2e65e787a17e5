"""Normalized general Dirichlet series: construction, evaluation, derivatives.

A series is ``f(s) = sum a_n exp(-lambda_n s)`` with ``a_1 = 1`` and
``lambda_1 = 0``.  Preset families (zeta, Dirichlet L-functions, Hurwitz
combinations and linear combinations of these) have periodic coefficients
and ``lambda_n = log n``; they are continued to the whole plane through
Hurwitz zeta values.  Custom series are only evaluated in their half-plane
of convergence.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.optimize import brentq

from . import errors
from ._kernel import PeriodicKernel

FAMILIES = ("zeta", "dirichlet-L", "hurwitz-combination", "linear-combination", "custom")
CONTINUATIONS = ("none", "eta-acceleration", "hurwitz-euler-maclaurin")

#: radius of the disc around a pole excluded from grid scans
POLE_EXCLUSION = 1e-3
DEFAULT_TOL = 1e-10


@dataclass
class EvalResult:
    value: complex
    error_bound: float
    terms_used: int
    method: str


@dataclass
class AbscissaEstimate:
    sigma_c: float
    D: float
    sigma_u_upper: float
    sigma_eps: dict
    prefix_length: int


@dataclass(eq=False)
class SeriesSpec:
    """A normalized general Dirichlet series.

    Periodic specs carry ``residues`` (``c_1 .. c_q``, ``a_n = c[(n-1) mod q]``)
    and evaluate anywhere except at the pole; custom specs carry an explicit
    finite coefficient/exponent table.
    """

    name: str
    family: str
    params: dict = field(default_factory=dict)
    residues: np.ndarray | None = None
    coefficients: np.ndarray | None = None
    exponents: np.ndarray | None = None
    continuation: str = "none"
    pole: complex | None = None
    multiplicative: bool = False
    functional_equation: dict = field(default_factory=dict)
    children: tuple = ()
    weights: tuple = ()
    _kernel: PeriodicKernel | None = field(default=None, repr=False)
    _sigma_c: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise errors.UnknownFamily(f"unknown family {self.family!r}")
        if self.continuation not in CONTINUATIONS:
            raise errors.InvalidSpec(f"unknown continuation {self.continuation!r}")
        if self.residues is not None:
            self.residues = np.asarray(self.residues, dtype=complex)
            if abs(self.residues[0] - 1) > 1e-12:
                raise errors.InvalidSpec("normalization requires a_1 = 1")
            self._kernel = PeriodicKernel(self.residues)
        else:
            a = np.asarray(self.coefficients, dtype=complex)
            lam = np.asarray(self.exponents, dtype=float)
            if a.ndim != 1 or a.shape != lam.shape or a.size < 2:
                raise errors.InvalidSpec("coefficient and exponent tables must match")
            if abs(a[0] - 1) > 1e-12 or lam[0] != 0:
                raise errors.InvalidSpec("normalization requires a_1 = 1 and lambda_1 = 0")
            if np.any(np.diff(lam) <= 0):
                raise errors.InvalidSpec("exponents must be strictly increasing")
            if lam[-1] < math.log(lam.size):
                raise errors.InvalidSpec("exponent prefix does not grow like an unbounded sequence")
            self.coefficients, self.exponents = a, lam

    # -- coefficient access ----------------------------------------------
    @property
    def periodic(self) -> bool:
        return self.residues is not None

    @property
    def modulus(self) -> int:
        return len(self.residues) if self.periodic else 0

    @property
    def prefix_length(self) -> int | None:
        """Stored prefix length; ``None`` means coefficients are generated on demand."""
        return None if self.periodic else self.coefficients.size

    def prefix(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """First ``n`` coefficients and exponents."""
        if self.periodic:
            idx = np.arange(n)
            return self.residues[idx % self.modulus], np.log(idx + 1.0)
        if n > self.coefficients.size:
            raise errors.PrefixTooShort(f"only {self.coefficients.size} coefficients stored")
        return self.coefficients[:n], self.exponents[:n]

    def coefficient(self, n: int) -> complex:
        return complex(self.prefix(n)[0][n - 1])

    # -- identity ---------------------------------------------------------
    def descriptor(self) -> dict:
        d = {"name": self.name, "family": self.family, "params": _jsonable(self.params)}
        if self.periodic:
            d["residues"] = [[c.real, c.imag] for c in self.residues]
        else:
            d["coefficients"] = [[c.real, c.imag] for c in self.coefficients]
            d["exponents"] = self.exponents.tolist()
        return d

    @property
    def spec_hash(self) -> str:
        blob = json.dumps(self.descriptor(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def real_coefficients(self) -> bool:
        a = self.residues if self.periodic else self.coefficients
        return bool(np.all(np.abs(a.imag) < 1e-15))

    def sigma_c(self) -> float:
        if self._sigma_c is None:
            n = 4096 if self.periodic else self.coefficients.size
            self._sigma_c = estimate_abscissae(self, n).sigma_c if n >= 16 else 0.0
        return self._sigma_c


class CallableSpec:
    """An arbitrary analytic test function given by vectorised ``f, f', f''``.

    Used by the verification harness (constructed multiple zeros, toy maps);
    every routine that accepts a SeriesSpec for evaluation accepts this too.
    """

    family = "callable"
    continuation = "callable"
    multiplicative = False
    periodic = False

    def __init__(self, name, f, df, d2f, pole=None, real_coefficients=False):
        self.name = name
        self.funcs = (f, df, d2f)
        self.pole = pole
        self.real_coefficients = real_coefficients
        self.params = {}

    @property
    def spec_hash(self) -> str:
        return hashlib.sha256(self.name.encode()).hexdigest()[:16]

    def descriptor(self) -> dict:
        return {"name": self.name, "family": "callable"}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# arithmetic helpers
# ---------------------------------------------------------------------------

def primes_up_to(n: int) -> np.ndarray:
    """Sieve of Eratosthenes."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0]


def _factor(n: int) -> dict:
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def totient(n: int) -> int:
    return reduce(lambda acc, pk: acc // pk[0] * (pk[0] - 1), _factor(n).items(), n)


def primitive_root(q: int) -> int:
    """Smallest generator of (Z/qZ)*; raises if the group is not cyclic."""
    phi = totient(q)
    if q in (1, 2):
        return 1
    prime_factors = list(_factor(phi))
    for g in range(2, q):
        if math.gcd(g, q) != 1:
            continue
        if all(pow(g, phi // p, q) != 1 for p in prime_factors):
            return g
    raise errors.InvalidSpec(f"(Z/{q}Z)* is not cyclic; only cyclic moduli are supported")


def dirichlet_character(q: int, index: int) -> np.ndarray:
    """Values chi(1) .. chi(q) for chi(g^k) = exp(2 pi i index k / phi(q)), g = smallest primitive root."""
    if q < 1:
        raise errors.InvalidSpec("modulus must be positive")
    phi = totient(q)
    if not 0 <= index < phi:
        raise errors.InvalidSpec(f"character index must lie in [0, {phi})")
    g = primitive_root(q)
    vals = np.zeros(q, dtype=complex)
    x = 1 % q
    for k in range(phi):
        ang = 2 * math.pi * index * k / phi
        vals[(x - 1) % q] = complex(round(math.cos(ang), 15), round(math.sin(ang), 15))
        x = x * g % q
    if q == 1:
        vals[0] = 1.0
    return vals


def character_is_primitive(q: int, index: int) -> bool:
    chi = dirichlet_character(q, index)
    for d in range(1, q):
        if q % d:
            continue
        # induced from modulus d iff chi(n) = 1 whenever n = 1 mod d, gcd(n, q) = 1
        if all(abs(chi[n - 1] - 1) < 1e-12 for n in range(1, q + 1) if n % d == 1 % d and math.gcd(n, q) == 1):
            return False
    return True


def character_parity(q: int, index: int) -> int:
    return 0 if abs(dirichlet_character(q, index)[(q - 1) - 1] - 1) < 1e-12 else 1


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

DH_XI = (math.sqrt(10 - 2 * math.sqrt(5)) - 2) / (math.sqrt(5) - 1)


def make_preset(family: str, **params) -> SeriesSpec:
    """Build a preset spec.

    ``make_preset("zeta")``, ``make_preset("dirichlet-L", q=5, index=2)``,
    ``make_preset("hurwitz-combination", q=5, weights={1: 1, 2: xi, ...})``,
    ``make_preset("linear-combination", children=[...], weights=[...])``,
    ``make_preset("davenport-heilbronn")``.
    """
    if family == "zeta":
        return SeriesSpec(
            name="zeta", family="zeta", residues=np.array([1.0]),
            continuation="hurwitz-euler-maclaurin", pole=1 + 0j, multiplicative=True,
            functional_equation={"type": "riemann", "conductor": 1, "parity": 0},
        )
    if family == "dirichlet-L":
        q, index = int(params.get("q", 0)), int(params.get("index", -1))
        if q < 3:
            raise errors.InvalidSpec("dirichlet-L needs modulus q >= 3")
        chi = dirichlet_character(q, index)
        pole = 1 + 0j if index == 0 else None
        return SeriesSpec(
            name=f"L({q},{index})", family="dirichlet-L", params={"q": q, "index": index},
            residues=chi, continuation="hurwitz-euler-maclaurin", pole=pole, multiplicative=True,
            functional_equation={"type": "dirichlet", "conductor": q,
                                 "parity": character_parity(q, index),
                                 "primitive": character_is_primitive(q, index)},
        )
    if family in ("hurwitz-combination", "davenport-heilbronn"):
        if family == "davenport-heilbronn":
            q = 5
            weights = {1: 1.0, 2: DH_XI, 3: -DH_XI, 4: -1.0}
            name = "davenport-heilbronn"
        else:
            q = int(params["q"])
            weights = {int(k): complex(v) for k, v in dict(params["weights"]).items()}
            name = params.get("name", f"hurwitz({q})")
        res = np.zeros(q, dtype=complex)
        for a, w in weights.items():
            if not 1 <= a <= q:
                raise errors.InvalidSpec(f"fraction {a}/{q} out of range")
            if not cmath.isfinite(complex(w)):
                raise errors.InvalidSpec("weights must be finite")
            res[a - 1] = w
        if res[0] == 0:
            raise errors.InvalidSpec("weight of the fraction 1/q must be nonzero")
        scale = res[0]
        res = res / scale
        pole = 1 + 0j if abs(res.sum()) > 1e-12 else None
        return SeriesSpec(
            name=name, family="hurwitz-combination",
            params={"q": q, "weights": {a: complex(w) for a, w in weights.items()}, "scale": complex(scale)},
            residues=res, continuation="hurwitz-euler-maclaurin", pole=pole, multiplicative=False,
            functional_equation={"type": "dirichlet", "conductor": q} if family == "davenport-heilbronn" else {},
        )
    if family == "linear-combination":
        children = list(params["children"])
        weights = [complex(w) for w in params["weights"]]
        if len(children) != len(weights) or not children:
            raise errors.InvalidSpec("children and weights must have equal nonzero length")
        if not all(c.periodic for c in children):
            raise errors.InvalidSpec("children must be series of the same type (lambda_n = log n)")
        if not all(cmath.isfinite(w) for w in weights):
            raise errors.InvalidSpec("weights must be finite")
        q = reduce(lambda a, b: a * b // math.gcd(a, b), [c.modulus for c in children], 1)
        res = np.zeros(q, dtype=complex)
        idx = np.arange(q)
        for c, w in zip(children, weights):
            res += w * c.residues[idx % c.modulus]
        scale = res[0]
        if abs(scale) < 1e-14:
            raise errors.InvalidSpec("combination has a_1 = 0 and cannot be normalized")
        res = res / scale
        pole = 1 + 0j if abs(res.sum()) > 1e-12 else None
        name = params.get("name") or " + ".join(f"{_fmt(w)}*{c.name}" for c, w in zip(children, weights))
        return SeriesSpec(
            name=name, family="linear-combination",
            params={"children": [c.name for c in children], "weights": weights, "scale": complex(scale)},
            residues=res, continuation="hurwitz-euler-maclaurin", pole=pole, multiplicative=False,
            children=tuple(children), weights=tuple(weights),
        )
    if family == "custom":
        return SeriesSpec(
            name=params.get("name", "custom"), family="custom",
            coefficients=np.asarray(params["coefficients"], dtype=complex),
            exponents=np.asarray(params["exponents"], dtype=float),
            continuation="none", multiplicative=bool(params.get("multiplicative", False)),
        )
    raise errors.UnknownFamily(f"unknown family {family!r}")


def _fmt(w: complex) -> str:
    return f"{w.real:g}" if w.imag == 0 else f"({w.real:g}{w.imag:+g}j)"


def combination_preset(q: int, i: int, j: int, weight: float) -> SeriesSpec:
    """``L(q, i, s) + weight * L(q, j, s)``, normalized."""
    a = make_preset("dirichlet-L", q=q, index=i)
    b = make_preset("dirichlet-L", q=q, index=j)
    return make_preset("linear-combination", children=[a, b], weights=[1.0, weight],
                       name=f"L({q},{i})+{weight:g}*L({q},{j})")


def parse_spec_ref(ref: str) -> SeriesSpec:
    """Short textual references: ``zeta``, ``L:5:2``, ``combo:7[:i:j[:w]]``, ``dh``, or a spec file path."""
    parts = ref.split(":")
    head = parts[0].lower()
    if head == "zeta":
        return make_preset("zeta")
    if head == "l" and len(parts) == 3:
        return make_preset("dirichlet-L", q=int(parts[1]), index=int(parts[2]))
    if head == "combo":
        q = int(parts[1]) if len(parts) > 1 else 7
        i = int(parts[2]) if len(parts) > 2 else 2
        j = int(parts[3]) if len(parts) > 3 else 4
        w = float(parts[4]) if len(parts) > 4 else 0.34375
        return combination_preset(q, i, j, w)
    if head in ("dh", "davenport-heilbronn"):
        return make_preset("davenport-heilbronn")
    from .specfile import load_spec

    return load_spec(ref)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _check_pole(spec, s: complex):
    if spec.pole is not None and abs(s - spec.pole) < 1e-12:
        raise errors.EvaluationAtPole(f"{spec.name} has a pole at s = {spec.pole}")


def _termwise(spec: SeriesSpec, s: np.ndarray):
    a, lam = spec.coefficients, spec.exponents
    vals = np.empty((3,) + s.shape, dtype=complex)
    bnds = np.empty((3,) + s.shape)
    flat = s.ravel()
    out_v = np.empty((3, flat.size), dtype=complex)
    out_b = np.empty((3, flat.size))
    for lo in range(0, flat.size, 2048):
        blk = flat[lo:lo + 2048]
        terms = a * np.exp(-np.outer(blk, lam))
        absterm = np.abs(terms) * (np.abs(blk)[:, None] * lam + 4)
        for d in range(3):
            out_v[d, lo:lo + 2048] = ((-lam) ** d * terms).sum(axis=1)
            out_b[d, lo:lo + 2048] = 8 * 2.0**-52 * (absterm * lam**d).sum(axis=1)
    vals[:] = out_v.reshape((3,) + s.shape)
    bnds[:] = out_b.reshape((3,) + s.shape)
    return vals, bnds


def evaluate_grid(spec, s):
    """Values and absolute error bounds of ``f, f', f''`` on an array of points.

    Returns ``(values, bounds)`` with shape ``(3,) + s.shape``.  No tolerance is
    enforced; points at the pole produce non-finite values.
    """
    s = np.asarray(s, dtype=complex)
    if isinstance(spec, CallableSpec):
        vals = np.stack([np.asarray(f(s), dtype=complex) * np.ones(s.shape) for f in spec.funcs])
        bnds = 1e-14 * (1 + np.abs(vals))
        return vals, bnds
    if spec.periodic:
        at_pole = None
        if spec.pole is not None:
            at_pole = s == spec.pole
            if at_pole.any():
                s = np.where(at_pole, s + 1e-300j + 1e-14, s)
        vals, bnds = spec._kernel.evaluate(s)
        if at_pole is not None and at_pole.any():
            vals[:, at_pole] = complex("nan+nanj")
        return vals, bnds
    return _termwise(spec, s)


def _convergence_guard(spec, s: complex, margin: float = 0.5):
    if getattr(spec, "continuation", "") == "none":
        sc = spec.sigma_c()
        if s.real <= sc + margin:
            raise errors.ContinuationUnavailable(
                f"{spec.name} is only evaluated for Re s > {sc + margin:.4g} (no continuation)")


def evaluate(spec, s: complex, tol: float = DEFAULT_TOL, precision: str = "double") -> EvalResult:
    """Value of the (continued) function at ``s`` with a certified-style error bound."""
    return _eval_order(spec, complex(s), 0, tol, precision)


def eval_derivative(spec, s: complex, order: int = 1, tol: float = DEFAULT_TOL,
                    method: str = "auto", precision: str = "double") -> EvalResult:
    """First or second derivative.

    ``method="auto"`` differentiates the series term-wise in the convergence
    half-plane and differentiates the Euler-Maclaurin expansion elsewhere;
    ``method="cauchy"`` uses a trapezoidal Cauchy integral of ``evaluate``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    s = complex(s)
    if method == "cauchy":
        return cauchy_derivative(spec, s, order, tol)
    return _eval_order(spec, s, order, tol, precision)


def _eval_order(spec, s: complex, order: int, tol: float, precision: str) -> EvalResult:
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_pole(spec, s)
    _convergence_guard(spec, s)
    if precision == "high":
        return _eval_high(spec, s, order)
    if isinstance(spec, CallableSpec):
        v, b = evaluate_grid(spec, np.array([s]))
        return EvalResult(complex(v[order, 0]), float(b[order, 0]), 0, "callable")
    if not spec.periodic:
        v, b = _termwise(spec, np.array([s]))
        bound = float(b[order, 0])
        if bound > tol:
            raise errors.ToleranceUnreachable(f"rounding bound {bound:.3g} exceeds tol")
        return EvalResult(complex(v[order, 0]), bound, spec.coefficients.size, "termwise")
    kern = spec._kernel
    base = int(kern.default_cutoff(np.array([s]))[0])
    best = None
    for mult in (1, 2, 4, 8, 16):
        cut = base * mult
        v, b = kern.evaluate(np.array([s]), cutoff=cut)
        res = EvalResult(complex(v[order, 0]), float(b[order, 0]), cut * kern.q, "euler-maclaurin")
        if best is None or res.error_bound < best.error_bound:
            best = res
        if res.error_bound <= tol:
            return res
    raise errors.ToleranceUnreachable(
        f"best error bound {best.error_bound:.3g} > tol {tol:.3g} at s = {s}")


def _eval_high(spec, s: complex, order: int, dps: int = 30) -> EvalResult:
    import mpmath as mp

    with mp.workdps(dps):
        if isinstance(spec, CallableSpec):
            raise ValueError("high precision is not available for callable specs")
        ms = mp.mpc(s.real, s.imag)
        if spec.periodic:
            q = spec.modulus
            lq = mp.log(q)
            total = mp.mpc(0)
            for a in range(1, q + 1):
                c = spec.residues[a - 1]
                if c == 0:
                    continue
                x = mp.mpf(a) / q
                z = [mp.zeta(ms, x, d) for d in range(order + 1)]
                qs = mp.power(q, -ms)
                if order == 0:
                    term = qs * z[0]
                elif order == 1:
                    term = qs * (z[1] - lq * z[0])
                else:
                    term = qs * (z[2] - 2 * lq * z[1] + lq**2 * z[0])
                total += mp.mpc(c.real, c.imag) * term
        else:
            total = mp.fsum(mp.mpc(a.real, a.imag) * (-lam) ** order * mp.exp(-lam * ms)
                            for a, lam in zip(spec.coefficients, spec.exponents))
        value = complex(total)
    return EvalResult(value, 10.0 ** (-dps + 5) * max(1.0, abs(value)) + 2.0**-52 * abs(value),
                      0, f"mpmath-{dps}")


def cauchy_derivative(spec, s: complex, order: int, tol: float = DEFAULT_TOL) -> EvalResult:
    """Trapezoidal Cauchy integral on a circle avoiding the pole (64 to 512 nodes)."""
    radius = 0.25
    if spec.pole is not None:
        dist = abs(s - spec.pole)
        if dist <= tol:
            raise errors.CircleHitsPole(f"s is within tol of the pole at {spec.pole}")
        radius = min(radius, dist / 2)
    prev = None
    for nodes in (64, 128, 256, 512):
        theta = 2 * np.pi * np.arange(nodes) / nodes
        w = s + radius * np.exp(1j * theta)
        v, b = evaluate_grid(spec, w)
        integrand = v[0] * np.exp(-1j * order * theta)
        est = complex(math.factorial(order) * integrand.mean() / radius**order)
        eval_err = math.factorial(order) * float(b[0].max()) / radius**order
        if prev is not None:
            quad_err = abs(est - prev)
            bound = quad_err + eval_err
            if bound <= tol or nodes == 512:
                if bound > tol:
                    raise errors.ToleranceUnreachable(f"Cauchy integral bound {bound:.3g} > tol")
                return EvalResult(est, bound, nodes, "cauchy-integral")
        prev = est
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# abscissae and the uniform limit
# ---------------------------------------------------------------------------

def estimate_abscissae(spec: SeriesSpec, N: int, eps_list=(0.9, 0.75, 0.5, 0.25, 0.1)) -> AbscissaEstimate:
    """Finite-prefix surrogates of the limsup formulas for sigma_c and D."""
    if N < 16:
        raise errors.PrefixTooShort("need N >= 16")
    if spec.prefix_length is not None and N > spec.prefix_length:
        raise errors.PrefixTooShort(f"N = {N} exceeds the stored prefix ({spec.prefix_length})")
    a, lam = spec.prefix(N)
    partial = np.abs(np.cumsum(a))
    n = np.arange(1, N + 1)
    window = slice(N // 2 - 1, N)
    with np.errstate(divide="ignore"):
        ratios = np.log(partial[window]) / lam[window]
    ratios = ratios[np.isfinite(ratios)]
    sigma_c = float(ratios.max()) if ratios.size else -math.inf
    D = float((np.log(n[window]) / lam[window]).max())
    sigma_eps = {}
    for eps in eps_list:
        try:
            sigma_eps[eps] = uniform_limit_threshold(spec, eps)
        except errors.BoundDoesNotClose:
            pass
    return AbscissaEstimate(sigma_c, D, sigma_c + D, sigma_eps, N)


def _tail_majorant(spec: SeriesSpec):
    """Return ``T(sigma) >= sum_{n>=2} |a_n| exp(-lambda_n sigma)`` (decreasing in sigma) and its domain start."""
    if spec.periodic:
        P = 4096
        a, lam = spec.prefix(P)
        absa, lam = np.abs(a[1:]), lam[1:]
        amax = float(np.abs(spec.residues).max())

        def T(sig):
            head = float(np.sum(absa * np.exp(-lam * sig)))
            return head + amax * P ** (1 - sig) / (sig - 1)

        return T, 1.0
    absa, lam = np.abs(spec.coefficients[1:]), spec.exponents[1:]
    keep = absa > 0
    absa, lam = absa[keep], lam[keep]
    return (lambda sig: float(np.sum(absa * np.exp(-lam * sig)))), -math.inf


def uniform_limit_threshold(spec: SeriesSpec, eps: float) -> float:
    """sigma_eps with sum_{n>=2} |a_n| e^{-lambda_n sigma} < eps for every sigma > sigma_eps.

    Hence |f(s) - 1| < eps, and f has no zero, in Re s > sigma_eps when eps < 1.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    T, start = _tail_majorant(spec)
    if T(0.0) == 0:
        return -math.inf  # f is identically 1
    hi = 400.0
    if T(hi) >= eps:
        raise errors.BoundDoesNotClose(f"tail majorant still >= {eps} at sigma = {hi}")
    lo = start + 1e-9 if math.isfinite(start) else -50.0
    if T(lo) < eps:
        if not math.isfinite(start):
            # bounded table: find where the majorant would cross eps further left
            while T(lo) < eps and lo > -1e4:
                lo *= 2
            if T(lo) < eps:
                return lo
        else:
            return lo
    return float(brentq(lambda x: T(x) - eps, lo, hi, xtol=1e-12))


# ---------------------------------------------------------------------------
# Euler products
# ---------------------------------------------------------------------------

_RS_CONST = 1.25506  # pi(x) < 1.25506 x / log x for x > 1


def euler_product_eval(spec: SeriesSpec, s: complex, prime_bound: int, tol: float = 1e-14) -> EvalResult:
    """Partial Euler product over primes p <= prime_bound with a tail bound on the omitted factors."""
    if not spec.multiplicative:
        raise errors.NotMultiplicative(f"{spec.name} has no Euler product")
    if prime_bound < 2:
        raise ValueError("prime_bound must be >= 2")
    s = complex(s)
    _check_pole(spec, s)
    sigma = s.real
    if sigma <= 1:
        raise errors.ContinuationUnavailable("tail bound of the Euler product needs Re s > 1")
    p = primes_up_to(prime_bound)
    if spec.periodic:
        ap = spec.residues[(p - 1) % spec.modulus]
        lp = np.log(p.astype(float))
    else:
        if p[-1] > spec.coefficients.size:
            raise errors.PrefixTooShort("prime bound exceeds the stored prefix")
        ap = spec.coefficients[p - 1]
        lp = spec.exponents[p - 1]
    factors = 1 - ap * np.exp(-lp * s)
    fmin = float(np.abs(factors).min())
    if fmin < tol:
        raise errors.FactorVanishes(f"an Euler factor has modulus {fmin:.3g}")
    logs = np.log(factors)
    value = complex(np.exp(-np.sum(logs)))
    P = float(prime_bound)
    amax = float(np.abs(spec.residues).max()) if spec.periodic else float(np.abs(spec.coefficients).max())
    # sum_{p>P} p^-sigma, by the integer tail and by the Rosser-Schoenfeld bound
    tail_int = P ** (1 - sigma) / (sigma - 1)
    tail_pr = _RS_CONST * sigma * P ** (1 - sigma) / ((sigma - 1) * math.log(P))
    x = amax * min(tail_int, tail_pr)
    r = amax * P ** (-sigma)
    log_tail = x / (1 - r)  # |log(1-y)| <= |y| / (1 - |y|)
    bound = abs(value) * math.expm1(log_tail)
    bound += abs(value) * 4 * 2.0**-52 * (p.size + 1) * (1 + abs(s) * math.log(P))
    return EvalResult(value, bound, int(p.size), "euler-product")
