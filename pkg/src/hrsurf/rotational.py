"""Rotational hypersurfaces of constant H_r around a vertical axis, ball model.

The profile is t = lambda(rho), rho the hyperbolic distance to the axis. With
  I(xi) = int_0^xi sinh^{n-1}(s) / cosh^{r-1}(s) ds,
  X = n H_r I,  A = sinh^{n-r},  p = X^{2/r},  q = A^{2/r} - X^{2/r},
the slope is lambda-dot = sqrt(p/q). The integration constant d is 0 for
every constructed curve.

Numerically the key quantity is g = A - X, the sign of q. It is tabulated
from its derivative
  g' = sinh^{n-r-1} cosh [delta + n H_r (1 - tanh^r)],  delta = (n-r) - n H_r,
which carries no cancellation even when H_r is at or next to the threshold
(n-r)/n and X and A agree to many digits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .errors import ClassificationError, DomainError, RangeError, ValidationError
from .graph_curvature import GraphJet
from .profiles import ClosedProfile, ProfileCurve, glue
from .quadrature import (
    CumulativeQuadrature,
    adaptive_gauss_kronrod,
    bisect,
    expand_bracket,
    tanh_sinh,
)
from .report import CurvatureReport
from .symfunc import PrincipalCurvatures, elementary_symmetric_all

RHO_MAX = 30.0
ROOT_TOL = 1e-12


class Shape(enum.Enum):
    ENTIRE_GRAPH = "EntireGraph"
    COMPACT_SPHERE = "CompactSphere"


def as_fraction(value) -> Fraction:
    """Exact rational for H_r. Floats go through their shortest repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError("H_r must be a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse H_r={value!r}") from exc
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError("H_r must be finite")
    return Fraction(repr(value))


@dataclass(frozen=True)
class RotationalSpec:
    n: int
    r: int
    H: Fraction
    d: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError("n must be an integer >= 2")
        if not 1 <= self.r <= self.n:
            raise RangeError(f"r={self.r} outside 1..{self.n}")
        object.__setattr__(self, "H", as_fraction(self.H))
        if self.d == 0 and self.H <= 0:
            raise DomainError("d = 0 requires H_r > 0")

    @property
    def h(self) -> float:
        return float(self.H)

    @property
    def threshold(self) -> Fraction:
        return Fraction(self.n - self.r, self.n)

    @property
    def delta(self) -> float:
        """(n-r) - n H_r, exactly rounded."""
        return float((self.n - self.r) - self.n * self.H)


def _check_d0(spec: RotationalSpec):
    if spec.d != 0:
        raise ValidationError("only d = 0 curves are constructed")


def _i_integrand(n, r):
    return lambda s: np.sinh(s) ** (n - 1) / np.cosh(s) ** (r - 1)


def integral_I(n: int, r: int, xi: float) -> float:
    """I(xi) by adaptive Gauss-Kronrod to 1e-12 absolute (or 1e-13 relative)."""
    if xi < 0:
        raise DomainError(f"xi must be >= 0, got {xi}")
    if xi == 0:
        return 0.0
    val, _ = adaptive_gauss_kronrod(_i_integrand(n, r), 0.0, float(xi), abs_tol=1e-12, rel_tol=1e-13)
    return val


def pq(spec: RotationalSpec, xi: float) -> tuple[float, float]:
    """(p, q) = ((nHI + d)^{2/r}, sinh^{(n-r) 2/r} - (nHI + d)^{2/r})."""
    base = spec.n * spec.h * integral_I(spec.n, spec.r, xi) + spec.d
    if base < 0 and (2 % spec.r):
        raise DomainError("n H_r I + d < 0 with a non-integer exponent")
    p = abs(base) ** (2 / spec.r) if base >= 0 else base ** (2 // spec.r)
    q = math.sinh(xi) ** ((spec.n - spec.r) * 2 / spec.r) - p
    return p, q


def q_stable(spec: RotationalSpec, xi):
    """q for d = 0 evaluated through g = A - X, vectorised.

    q = A^{2/r} (1 - (1 - g/A)^{2/r}); keeps its sign and relative accuracy
    where X and A agree to many digits.
    """
    _check_d0(spec)
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    sol = solver(spec)
    r = spec.r
    A = sol.A(xi)
    g = sol.g(xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = -(A ** (2 / r)) * np.expm1((2 / r) * np.log1p(-g / A))
    return np.where(xi == 0, 0.0, q)


def origin_diagnostic(spec: RotationalSpec) -> dict:
    """p(0)/q(0): 0 by convention for d = 0, and -1 when d != 0, where
    the slope sqrt(p/q) is undefined at the axis."""
    if spec.d == 0:
        return {"ratio": 0.0, "defined_at_axis": True}
    p, q = pq(spec, 0.0)
    return {"ratio": p / q, "defined_at_axis": False}


def classify(spec: RotationalSpec) -> Shape:
    """EntireGraph iff H_r <= (n-r)/n, compared exactly."""
    _check_d0(spec)
    return Shape.ENTIRE_GRAPH if spec.H <= spec.threshold else Shape.COMPACT_SPHERE


def bracket_start(spec: RotationalSpec) -> float:
    """arctanh(((n-r)/(n H_r))^{1/r}), where g stops increasing."""
    ratio = (spec.n - spec.r) / (spec.n * spec.h)
    return math.atanh(ratio ** (1 / spec.r)) if ratio < 1 else math.inf


class _Solver:
    """Tables for I, g and lambda of one (n, r, H_r) with d = 0."""

    def __init__(self, spec: RotationalSpec):
        self.spec = spec
        n, r = spec.n, spec.r
        self.n, self.r, self.h = n, r, spec.h
        self.nh = n * spec.h
        self.delta = spec.delta
        self.shape = classify(spec)
        self.I = CumulativeQuadrature(_i_integrand(n, r), panel=0.05, order=24)
        self.g_tab = CumulativeQuadrature(self.dg, panel=0.05, order=24)
        self.rho0 = None
        self.eps = None
        if self.shape is Shape.COMPACT_SPHERE:
            self.rho0 = self._find_root()
            self.eps = min(0.5, 0.5 * self.rho0)
            self.tail = CumulativeQuadrature(lambda t: self.dg(self.rho0 - t), panel=0.02, order=24)
            self.tail_lam = CumulativeQuadrature(self._tail_integrand, panel=0.02, order=24)
        self.main_lam = CumulativeQuadrature(self._main_slope, panel=0.05, order=24)

    # -- building blocks ---------------------------------------------------

    def A(self, x):
        return np.sinh(x) ** (self.n - self.r)

    def dA(self, x):
        if self.n == self.r:
            return np.zeros_like(x)
        return (self.n - self.r) * np.sinh(x) ** (self.n - self.r - 1) * np.cosh(x)

    def dX(self, x):
        return self.nh * np.sinh(x) ** (self.n - 1) / np.cosh(x) ** (self.r - 1)

    def dg(self, x):
        x = np.asarray(x, dtype=float)
        if self.n == self.r:
            return -self.nh * np.tanh(x) ** (self.n - 1)
        with np.errstate(divide="ignore"):
            one_minus = -np.expm1(self.r * np.log(np.tanh(x)))
        one_minus = np.where(x > 0, one_minus, 1.0)
        return np.sinh(x) ** (self.n - self.r - 1) * np.cosh(x) * (self.delta + self.nh * one_minus)

    def g(self, x):
        x = np.asarray(x, dtype=float)
        if self.n == self.r:
            return 1.0 - self.nh * self.I(x)
        return self.g_tab(x)

    def _find_root(self) -> float:
        start = 0.0 if self.n == self.r else bracket_start(self.spec)
        f = lambda x: float(self.g(x))
        b0 = max(2.0 * start, 1.0)
        lo, hi = expand_bracket(f, start, b0)
        return bisect(f, lo, hi, xtol=ROOT_TOL)

    # -- slope and its derivative ------------------------------------------

    def _slope_parts(self, x, g=None):
        """(lambda-dot, lambda-ddot) at x; g may be supplied (tail representation)."""
        x = np.asarray(x, dtype=float)
        r = self.r
        A = self.A(x)
        if g is None:
            g = self.g(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            u_direct = self.nh * self.I(x) / A
            use_g = u_direct > 0.5
            u = np.where(use_g, 1.0 - g / A, u_direct)
            w = u ** (2 / r)
            one_minus_w = np.where(use_g, -np.expm1((2 / r) * np.log1p(-g / A)), 1.0 - w)
            slope = np.sqrt(w / one_minus_w)
            du = np.where(use_g,
                          (g * self.dA(x) / A - self.dg(x)) / A,
                          self.dX(x) / A - u * self.dA(x) / A)
            dw = (2 / r) * u ** (2 / r - 1) * du
            curv = dw / (2.0 * slope * one_minus_w**2)
        at_axis = x == 0
        slope = np.where(at_axis, 0.0, slope)
        curv = np.where(at_axis, self.h ** (1 / r), curv)
        return slope, curv

    def slope(self, x):
        return self._slope_parts(x)[0]

    def _tail_g(self, t):
        return -self.tail(t)

    def _main_slope(self, x):
        return self._slope_parts(x)[0]

    def _tail_integrand(self, s):
        t = np.asarray(s, dtype=float) ** 2
        x = self.rho0 - t
        slope, _ = self._slope_parts(x, g=self._tail_g(t))
        return 2.0 * np.asarray(s) * slope

    def derivatives(self, x):
        """lambda-dot and lambda-ddot at x in [0, rho0] (infinite at rho0)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        slope = np.empty_like(x)
        curv = np.empty_like(x)
        if self.rho0 is None:
            slope[:], curv[:] = self._slope_parts(x)
            return slope, curv
        if np.any(x > self.rho0):
            raise DomainError(f"rho beyond the root rho0={self.rho0}")
        near = x > self.rho0 - self.eps
        slope[~near], curv[~near] = self._slope_parts(x[~near])
        t = self.rho0 - x[near]
        with np.errstate(divide="ignore", invalid="ignore"):
            slope[near], curv[near] = self._slope_parts(x[near], g=self._tail_g(t))
        end = x == self.rho0
        slope[end] = math.inf
        curv[end] = math.inf
        return slope, curv

    def lam(self, x):
        """lambda(x) = int_0^x lambda-dot, with the substitution xi = rho0 - s^2 near rho0."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0):
            raise DomainError("rho must be >= 0")
        if self.rho0 is None:
            return self.main_lam(x)
        if np.any(x > self.rho0):
            raise DomainError(f"rho beyond the root rho0={self.rho0}")
        split = self.rho0 - self.eps
        out = np.empty_like(x)
        near = x > split
        out[~near] = self.main_lam(x[~near])
        if np.any(near):
            s_split = math.sqrt(self.eps)
            base = float(self.main_lam(split)) + float(self.tail_lam(s_split))
            out[near] = base - self.tail_lam(np.sqrt(self.rho0 - x[near]))
        return out

    @property
    def t0(self) -> float:
        if self.rho0 is None:
            raise ClassificationError("entire graphs have no gluing height")
        return float(self.lam(self.rho0)[0])

    def t0_tanh_sinh(self) -> float:
        """Independent value of lambda(rho0) by double-exponential quadrature."""
        if self.rho0 is None:
            raise ClassificationError("entire graphs have no gluing height")

        def f(x, da, db):
            slope = np.empty_like(x)
            near = db < self.eps
            slope[~near] = self._slope_parts(x[~near])[0]
            slope[near] = self._slope_parts(self.rho0 - db[near], g=self._tail_g(db[near]))[0]
            return slope

        return tanh_sinh(f, 0.0, self.rho0, tol=1e-13)


@lru_cache(maxsize=64)
def _solver_cached(n: int, r: int, H: Fraction) -> _Solver:
    return _Solver(RotationalSpec(n, r, H))


def solver(spec: RotationalSpec) -> _Solver:
    _check_d0(spec)
    return _solver_cached(spec.n, spec.r, spec.H)


def rho0(spec: RotationalSpec) -> float:
    """Root of q (equivalently of g = A - X) for a compact sphere, to 1e-12."""
    if classify(spec) is not Shape.COMPACT_SPHERE:
        raise ClassificationError(f"H_r={spec.H} <= {spec.threshold}: entire graph, no root")
    return solver(spec).rho0


def gluing_height(spec: RotationalSpec) -> float:
    """t0 = lambda(rho0), half the height of the closed sphere."""
    return solver(spec).t0


def lam(spec: RotationalSpec, rho):
    return solver(spec).lam(rho)


def lam_derivatives(spec: RotationalSpec, rho):
    return solver(spec).derivatives(rho)


def profile(spec: RotationalSpec, samples: int = 512, rho_max: float = RHO_MAX) -> ProfileCurve:
    """Uniform rho samples of (lambda, lambda-dot, lambda-ddot).

    Entire graphs are sampled on [0, rho_max] and flagged as truncated.
    Compact spheres are sampled on [0, rho0] (or [0, rho_max] if shorter);
    the last sample sits on rho0, where the slope is infinite.
    """
    if samples < 2:
        raise ValidationError("samples must be >= 2")
    if not rho_max > 0:
        raise ValidationError("rho_max must be positive")
    sol = solver(spec)
    if sol.rho0 is None:
        end, domain, singular, truncated = rho_max, (0.0, math.inf), False, True
    elif sol.rho0 <= rho_max:
        end, domain, singular, truncated = sol.rho0, (0.0, sol.rho0), True, False
    else:
        end, domain, singular, truncated = rho_max, (0.0, sol.rho0), False, True
    rho = np.linspace(0.0, end, samples)
    rho[-1] = end
    dl, ddl = sol.derivatives(rho)
    table = np.column_stack([rho, sol.lam(rho), dl, ddl])
    meta = {
        "n": spec.n, "r": spec.r, "target_kind": "H_r", "target": spec.h,
        "H_exact": str(spec.H), "d": 0.0, "constant": "d",
        "shape": sol.shape.value, "rho0": sol.rho0, "truncated": truncated,
        "rho_max": float(rho_max),
    }
    if sol.rho0 is not None:
        meta["t0"] = sol.t0
    return ProfileCurve("rotational", "rho", table, domain, singular, meta)


def spec_from_curve(curve: ProfileCurve) -> RotationalSpec:
    m = curve.metadata
    return RotationalSpec(int(m["n"]), int(m["r"]), Fraction(m.get("H_exact", repr(m["target"]))))


def principal_curvatures(spec: RotationalSpec, rho: float, dlam: float, ddlam: float) -> PrincipalCurvatures:
    """k_1 = ... = k_{n-1} = coth(rho) dlam / W and k_n = ddlam / W^3, W = sqrt(1 + dlam^2)."""
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    k = _curvatures(spec.n, np.asarray(rho, dtype=float), np.asarray(dlam, dtype=float),
                    np.asarray(ddlam, dtype=float))
    return PrincipalCurvatures(k)


def _curvatures(n, rho, dlam, ddlam):
    w2 = 1.0 + dlam * dlam
    ks = dlam / np.sqrt(w2) / np.tanh(rho)
    kn = ddlam / w2**1.5
    return np.concatenate([np.repeat(ks[..., None], n - 1, axis=-1), kn[..., None]], axis=-1)


def verify_constant_hr(curve: ProfileCurve, spec: RotationalSpec | None = None,
                       fd_step: float = 1e-4) -> CurvatureReport:
    """H_r of the principal curvatures minus the declared H_r at interior samples.

    Also differentiates the first integral sinh^{n-r} (dlam^2 / (1 + dlam^2))^{r/2}
    by central differences and compares with n H_r sinh^{n-1} / cosh^{r-1}
    (relative residual, flag ``first_integral`` at 1e-6).
    """
    spec = spec or spec_from_curve(curve)
    n, r = spec.n, spec.r
    mask = curve.finite_mask() & (curve.t > 0)
    rho, dl, ddl = curve.t[mask], curve.dlam[mask], curve.ddlam[mask]
    k = _curvatures(n, rho, dl, ddl)
    hr = elementary_symmetric_all(k)[..., r] / comb(n, r)
    report = CurvatureReport(residual=hr - spec.h, points=rho, sr=hr * comb(n, r), hr=hr,
                             tolerance=1e-8, label=f"rotational H_{r}")

    sol = solver(spec)
    lo, hi = rho - fd_step, rho + fd_step
    ok = lo > 0
    if sol.rho0 is not None:
        ok &= hi < sol.rho0
    x = rho[ok]

    def bracket(z):
        s = sol.derivatives(z)[0]
        return np.sinh(z) ** (n - r) * (s * s / (1.0 + s * s)) ** (r / 2)

    fd = (bracket(x + fd_step) - bracket(x - fd_step)) / (2 * fd_step)
    rhs = n * spec.h * np.sinh(x) ** (n - 1) / np.cosh(x) ** (r - 1)
    rel = np.abs(fd - rhs) / np.maximum(1.0, np.abs(rhs))
    gap = float(np.max(rel, initial=0.0))
    report.checks["first_integral"] = gap
    report.flags["first_integral"] = gap <= 1e-6
    return report


def glue_closed_profile(curve: ProfileCurve, spec: RotationalSpec | None = None) -> ClosedProfile:
    spec = spec or spec_from_curve(curve)
    if classify(spec) is not Shape.COMPACT_SPHERE:
        raise ClassificationError("entire graphs cannot be closed up")
    return glue(curve)


def ball_graph_jet(x, lam_val: float, dlam: float, ddlam: float) -> GraphJet:
    """Jet of u(x) = lambda(2 artanh |x|) in ball coordinates, from lambda and
    its rho-derivatives at rho = 2 artanh |x| (x != 0)."""
    x = np.asarray(x, dtype=float)
    s = float(np.linalg.norm(x))
    if not 0 < s < 1:
        raise DomainError("need 0 < |x| < 1")
    e = x / s
    jac = 2.0 / (1.0 - s * s)
    f1 = dlam * jac
    f2 = ddlam * jac**2 + dlam * 4.0 * s / (1.0 - s * s) ** 2
    radial = np.outer(e, e)
    hess = f2 * radial + (f1 / s) * (np.eye(x.size) - radial)
    return GraphJet(lam_val, f1 * e, hess)


def limit_checks(n: int, r: int) -> CurvatureReport:
    """Directional limit behaviour in H_r.

    i)   lambda(rho) is non-decreasing in H_r at rho in {1, 2, 5};
    ii)  rho0 increases as H_r decreases to (n-r)/n through (1 + 10^-j), j = 1..4;
    iii) sup over [0, 5] of lambda decreases as H_r -> 0 through 10^-j (n-r)/n.
    Magnitudes (rho0 values, sup values) are recorded in ``checks``.
    """
    if not n > r:
        raise RangeError("limit checks need n > r")
    thr = Fraction(n - r, n)
    rho = np.array([1.0, 2.0, 5.0])
    grid = [thr * Fraction(m) for m in ("1", "1/2", "1/5", "1/10", "1/100", "1/1000", "1/10000")]
    lams = np.array([lam(RotationalSpec(n, r, h), rho) for h in grid])
    mono = bool(np.all(lams[:-1] >= lams[1:] - 1e-12))

    near = [thr * (1 + Fraction(1, 10**j)) for j in range(1, 5)]
    roots = [rho0(RotationalSpec(n, r, h)) for h in near]
    roots_up = all(b > a for a, b in zip(roots, roots[1:]))

    dense = np.linspace(0.0, 5.0, 501)
    small = [thr * Fraction(1, 10**j) for j in range(1, 5)]
    sups = [float(np.max(lam(RotationalSpec(n, r, h), dense))) for h in small]
    sups_down = all(b < a for a, b in zip(sups, sups[1:]))

    residual = np.concatenate([np.diff(lams, axis=0).ravel(), np.diff(roots), np.diff(sups)])
    return CurvatureReport(
        residual=residual,
        label=f"limit-checks n={n} r={r}",
        checks={
            "lambda_grid_H": [str(h) for h in grid],
            "lambda_values": lams.tolist(),
            "rho0_H": [str(h) for h in near],
            "rho0_values": roots,
            "rho0_exceeds_10": roots[-1] > 10,
            "sup_H": [str(h) for h in small],
            "sup_values": sups,
        },
        flags={
            "lambda_monotone_in_H": mono,
            "rho0_increasing": roots_up,
            "sup_decreasing": sups_down,
        },
    )
