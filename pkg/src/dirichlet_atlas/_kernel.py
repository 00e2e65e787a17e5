"""Euler-Maclaurin evaluation of periodic-coefficient Dirichlet series.

A series whose coefficients repeat with period ``q``,

    f(s) = sum_{n>=1} c[n mod q] n^{-s} = q^{-s} sum_a c_a zeta(s, a/q),

is summed directly for ``n <= N*q`` and the remaining Hurwitz tails
``zeta(s, N + a/q)`` are replaced by their Euler-Maclaurin expansion.  All
derivatives up to order 2 come from the same expansion, together with an
absolute error bound covering truncation (Backlund's remainder estimate,
Cauchy estimates for the derivatives) and floating-point rounding.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.special import bernoulli

_EPS = 2.0**-52


def _bernoulli_coeffs(m_terms: int) -> np.ndarray:
    """B_{2j} / (2j)! for j = 1 .. m_terms + 1."""
    b = bernoulli(2 * m_terms + 2)
    return np.array([b[2 * j] / math.factorial(2 * j) for j in range(1, m_terms + 2)])


@njit(cache=True)
def _backlund(sig, mod_s, x, m, cm):
    poch = 1.0
    for k in range(2 * m + 1):
        poch *= mod_s + k
    return (mod_s + 2 * m + 1) / (sig + 2 * m + 1) * cm * poch * x ** (-sig - 2 * m - 1)


@njit(cache=True)
def _eval_points(s_arr, cuts, c, bcoef, m, rho, logtab, out_v, out_b):
    q = c.shape[0]
    logq = math.log(q)
    eps = 2.0**-52
    cm = abs(bcoef[m])
    for i in range(s_arr.shape[0]):
        s = s_arr[i]
        sig = s.real
        mods = abs(s)
        n_cut = cuts[i]
        v0 = 0j
        v1 = 0j
        v2 = 0j
        r0 = 0.0
        r1 = 0.0
        r2 = 0.0
        for n in range(1, n_cut * q + 1):
            cn = c[(n - 1) % q]
            if cn == 0:
                continue
            ln = logtab[n]
            term = cn * np.exp(-s * ln)
            v0 += term
            v1 -= ln * term
            v2 += ln * ln * term
            at = abs(term) * (mods * ln + 4.0)
            r0 += at
            r1 += at * ln
            r2 += at * ln * ln
        qs = np.exp(-s * logq)
        aqs = abs(qs)
        t0 = 0j
        t1 = 0j
        t2 = 0j
        tr0 = 0.0
        trc = 0.0
        for a in range(1, q + 1):
            ca = c[a - 1]
            if ca == 0:
                continue
            x = n_cut + a / q
            lx = math.log(x)
            e = np.exp(-s * lx)
            sm1 = s - 1.0
            g = x * e
            w0 = g / sm1 + 0.5 * e
            w1 = g * (-lx / sm1 - 1.0 / sm1**2) - 0.5 * lx * e
            w2 = g * (lx * lx / sm1 + 2 * lx / sm1**2 + 2.0 / sm1**3) + 0.5 * lx * lx * e
            tabs = abs(g / sm1) + 0.5 * abs(e)
            p0 = 1.0 + 0j
            p1 = 0j
            p2 = 0j
            k = 0
            for j in range(1, m + 1):
                while k < 2 * j - 1:
                    f = s + k
                    p2 = p2 * f + 2 * p1
                    p1 = p1 * f + p0
                    p0 = p0 * f
                    k += 1
                ej = e * x ** (1 - 2 * j)
                cj = bcoef[j - 1]
                w0 += cj * p0 * ej
                w1 += cj * (p1 - lx * p0) * ej
                w2 += cj * (p2 - 2 * lx * p1 + lx * lx * p0) * ej
                tabs += abs(cj * p0 * ej)
            t0 += ca * w0
            t1 += ca * w1
            t2 += ca * w2
            aca = abs(ca)
            scale = (1.0 + logq + lx)
            r0 += aca * tabs * aqs * (mods + 4.0)
            r1 += aca * tabs * aqs * (mods + 4.0) * scale
            r2 += aca * tabs * aqs * (mods + 4.0) * scale * scale
            tr0 += aca * _backlund(sig, mods, x, m, cm) * math.exp(-sig * logq)
            trc += aca * _backlund(sig - rho, mods + rho, x, m, cm) * math.exp(-(sig - rho) * logq)
        out_v[0, i] = v0 + qs * t0
        out_v[1, i] = v1 + qs * (t1 - logq * t0)
        out_v[2, i] = v2 + qs * (t2 - 2 * logq * t1 + logq * logq * t0)
        out_b[0, i] = tr0 + 8 * eps * r0
        out_b[1, i] = trc / rho + 8 * eps * r1
        out_b[2, i] = 2.0 * trc / (rho * rho) + 8 * eps * r2


class PeriodicKernel:
    """Evaluate ``sum_a c_a q^{-s} zeta(s, a/q)`` and its first two derivatives.

    ``residues`` holds ``c_1 .. c_q`` (``c_q`` is the weight of ``n = 0 mod q``).
    """

    def __init__(self, residues, m_terms: int = 12):
        self.c = np.ascontiguousarray(residues, dtype=complex)
        self.q = len(self.c)
        self.m = m_terms
        self.bcoef = _bernoulli_coeffs(m_terms)
        self.residue_sum = complex(self.c.sum())
        self._logtab = np.zeros(1)

    def default_cutoff(self, s: np.ndarray) -> np.ndarray:
        """Per-point head length N so that the expansion at x = N + a/q converges fast."""
        x_needed = (np.abs(s) + 2 * self.m + 2) / math.pi
        n = np.maximum(2, np.ceil(x_needed).astype(np.int64) + 1)
        return ((n + 7) // 8) * 8

    def _logs(self, nmax: int) -> np.ndarray:
        if self._logtab.size <= nmax:
            tab = np.zeros(max(nmax + 1, 2 * self._logtab.size))
            tab[1:] = np.log(np.arange(1, tab.size))
            self._logtab = tab
        return self._logtab

    def evaluate(self, s, cutoff: int | None = None, rho: float = 0.5):
        """Return ``(values, bounds)``, each of shape ``(3,) + s.shape`` (orders 0, 1, 2)."""
        s = np.asarray(s, dtype=complex)
        shape = s.shape
        flat = np.ascontiguousarray(s.ravel())
        if np.any(flat.real - rho <= -(2 * self.m + 1)):
            raise ValueError("Euler-Maclaurin remainder bound needs Re s > -(2M+1)")
        if cutoff is None:
            cuts = self.default_cutoff(flat)
        else:
            cuts = np.full(flat.size, int(cutoff), dtype=np.int64)
        logtab = self._logs(int(cuts.max(initial=2)) * self.q + 1)
        vals = np.empty((3, flat.size), dtype=complex)
        bnds = np.empty((3, flat.size), dtype=float)
        _eval_points(flat, cuts, self.c, self.bcoef, self.m, rho, logtab, vals, bnds)
        return vals.reshape((3,) + shape), bnds.reshape((3,) + shape)
