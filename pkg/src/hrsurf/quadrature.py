"""Quadrature and bracketing root finding used by the profile constructions.

All integrands are vectorised callables taking and returning ndarrays.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import NumericalFailure

# Kronrod 15-point extension of the 7-point Gauss rule on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
GK_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7 from each side).
_G_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
G_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_integral(f, a, b, order: int = 20):
    """Fixed-order Gauss-Legendre rule on [a, b]; a and b may be arrays."""
    x, w = gauss_legendre(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    nodes = a[..., None] + half[..., None] * (x + 1.0)
    return half * np.sum(w * f(nodes), axis=-1)


def adaptive_gauss_kronrod(f, a: float, b: float, abs_tol: float = 1e-12,
                           rel_tol: float = 1e-13, max_intervals: int = 5000):
    """Globally adaptive G7/K15 quadrature. Returns (value, error_estimate)."""
    if a == b:
        return 0.0, 0.0

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        fx = f(mid + half * GK_NODES)
        k = half * np.dot(GK_WEIGHTS, fx)
        g = half * np.dot(G_WEIGHTS, fx[_G_IDX])
        return k, abs(k - g)

    intervals = [(a, b, *panel(a, b))]
    while True:
        total = math.fsum(iv[2] for iv in intervals)
        err = math.fsum(iv[3] for iv in intervals)
        if err <= max(abs_tol, rel_tol * abs(total)):
            return total, err
        if len(intervals) >= max_intervals:
            raise NumericalFailure(f"adaptive quadrature did not converge (error {err:.3e})")
        worst = max(range(len(intervals)), key=lambda i: intervals[i][3])
        lo, hi, _, _ = intervals.pop(worst)
        mid = 0.5 * (lo + hi)
        intervals.append((lo, mid, *panel(lo, mid)))
        intervals.append((mid, hi, *panel(mid, hi)))


def tanh_sinh(f, a: float, b: float, tol: float = 1e-13, max_level: int = 12):
    """Double-exponential quadrature on [a, b] for endpoint-singular integrands.

    ``f(x, da, db)`` receives the nodes together with their distances to
    ``a`` and ``b`` computed without cancellation, so integrands can be
    evaluated accurately next to a singular endpoint.
    """
    width = b - a
    t_max = 4.5

    def nodes(t):
        u = 0.5 * math.pi * np.sinh(t)
        da = width / (np.exp(-2.0 * u) + 1.0)
        db = width / (np.exp(2.0 * u) + 1.0)
        w = 0.25 * math.pi * width * np.cosh(t) / np.cosh(u) ** 2
        keep = (da > 0) & (db > 0)
        return a + da[keep], da[keep], db[keep], w[keep]

    h = 0.5
    k = int(t_max / h)
    x, da, db, w = nodes(h * np.arange(-k, k + 1))
    acc = np.sum(w * f(x, da, db))
    estimate = h * acc
    for _ in range(max_level):
        h *= 0.5
        odd = np.arange(h, t_max, 2 * h)
        x, da, db, w = nodes(np.concatenate([-odd[::-1], odd]))
        acc += np.sum(w * f(x, da, db))
        new = h * acc
        if abs(new - estimate) <= tol * max(1.0, abs(new)):
            return float(new)
        estimate = new
    raise NumericalFailure("tanh-sinh quadrature did not converge")


class CumulativeQuadrature:
    """Running integral t -> int_0^t f(s) ds with a lazily extended panel table.

    Panels of width ``panel`` are integrated once with Gauss-Legendre and
    summed; a query adds the partial panel. Evaluation is vectorised over t.
    """

    def __init__(self, f, panel: float = 0.05, order: int = 24):
        self.f = f
        self.h = float(panel)
        self.order = order
        self._cum = np.zeros(1)

    def _extend(self, t_max: float):
        needed = int(math.floor(t_max / self.h)) + 1
        have = self._cum.size - 1
        if needed <= have:
            return
        k = np.arange(have, needed)
        parts = gauss_legendre_integral(self.f, k * self.h, (k + 1) * self.h, self.order)
        # running sum seeded with the last entry: same rounding however the table grew
        run = np.cumsum(np.concatenate([self._cum[-1:], parts]))
        self._cum = np.concatenate([self._cum, run[1:]])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("cumulative quadrature queried at negative offset")
        self._extend(float(np.max(t, initial=0.0)))
        k = np.floor(t / self.h).astype(int)
        k = np.minimum(k, self._cum.size - 1)
        lo = k * self.h
        with np.errstate(invalid="ignore"):
            partial = gauss_legendre_integral(self.f, lo, t, self.order)
        # zero-width partial panels may sit on an integrable singularity
        return self._cum[k] + np.where(t > lo, partial, 0.0)


def bisect(f, a: float, b: float, xtol: float = 1e-12, max_iter: int = 300) -> float:
    """Bisection on a sign-changing bracket [a, b]."""
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if (fa > 0) == (fb > 0):
        raise NumericalFailure(f"no sign change on [{a}, {b}]")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if b - a <= xtol or m in (a, b):
            return m
        fm = f(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    raise NumericalFailure("bisection did not converge")


def expand_bracket(f, a: float, b: float, limit: float = 700.0) -> tuple[float, float]:
    """Double b until f(b) differs in sign from f(a); returns the final bracket."""
    positive = f(a) > 0
    while (f(b) > 0) == positive:
        a, b = b, 2.0 * b
        if b > limit:
            raise NumericalFailure(f"no sign change found below {limit}")
    return a, b
