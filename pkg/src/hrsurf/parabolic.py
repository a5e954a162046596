"""Hypersurfaces invariant by parabolic translations and parabolic screw motions.

Everything lives in the half-space model. A screw-invariant graph is
t = lambda(y) + l . (x_1, ..., x_{n-1}) with y the height coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import (
    DomainError,
    DomainExhaustedError,
    NumericalFailure,
    RangeError,
    SingularDomainError,
    ValidationError,
)
from .graph_curvature import half_space_factor, screw_graph_jet, sr_minor_formula
from .profiles import ProfileCurve
from .report import CurvatureReport


@dataclass(frozen=True)
class ScrewSpec:
    """Screw pitch ``l`` (n-1 entries) and the prescribed constant S_r."""

    n: int
    r: int
    l: tuple = field(default=())
    target: float = 0.0
    target_kind: str = "S_r"

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("n must be >= 2")
        if not 1 <= self.r <= self.n:
            raise RangeError(f"r={self.r} outside 1..{self.n}")
        l = tuple(float(v) for v in (self.l if len(self.l) else [0.0] * (self.n - 1)))
        if len(l) != self.n - 1:
            raise ValidationError(f"pitch needs {self.n - 1} entries, got {len(l)}")
        if self.target_kind not in ("S_r", "H_r"):
            raise ValidationError("target_kind must be 'S_r' or 'H_r'")
        object.__setattr__(self, "l", l)

    @property
    def l2(self) -> float:
        return float(sum(v * v for v in self.l))

    @property
    def s_target(self) -> float:
        return self.target if self.target_kind == "S_r" else self.target * comb(self.n, self.r)


def _y_grid(a: float, b: float, samples: int, include_end: bool) -> np.ndarray:
    if samples < 2:
        raise ValidationError("samples must be >= 2")
    if include_end:
        return np.linspace(a, b, samples + 1)[1:] if a == 0 else np.linspace(a, b, samples)
    return np.linspace(a, b, samples)


def minimal_parabolic_profile(n: int, r: int, c: float, samples: int = 512,
                              y_range: tuple[float, float] | None = None) -> ProfileCurve:
    """Closed-form H_r = 0 curves invariant by parabolic translations.

    n = r: lambda = c ln y on (0, inf), sampled on ``y_range`` (default [0.1, 10]).
    n > r: lambda = r/(n-r) arcsin(y^a / c), a = (n-r)/r, on (0, c^{r/(n-r)}];
    the last sample is the endpoint, where dlambda is infinite.
    """
    if not 1 <= r <= n:
        raise RangeError(f"r={r} outside 1..{n}")
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    meta = {"n": n, "r": r, "target_kind": "S_r", "target": 0.0, "constant": "c", "c": c,
            "l": [0.0] * (n - 1)}
    if n == r:
        lo, hi = y_range or (0.1, 10.0)
        if not 0 < lo < hi:
            raise DomainError("y range must satisfy 0 < y_min < y_max")
        y = _y_grid(lo, hi, samples, False)
        table = np.column_stack([y, c * np.log(y), c / y, -c / y**2])
        return ProfileCurve("parabolic-minimal", "y", table, (0.0, math.inf), False, meta)

    a = (n - r) / r
    end = c ** (r / (n - r))
    lo, hi = y_range or (0.0, end)
    if not 0 <= lo < hi <= end:
        raise DomainError(f"y range must lie in (0, {end}]")
    y = _y_grid(lo, hi, samples, True)
    ya = y**a
    gap = c * c - ya * ya
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = (r / (n - r)) * np.arcsin(np.minimum(ya / c, 1.0))
        dlam = y ** (a - 1) / np.sqrt(gap)
        ddlam = y ** (a - 2) * gap ** (-1.5) * ((a - 1) * gap + a * ya * ya)
    at_end = y == end
    dlam[at_end] = math.inf
    ddlam[at_end] = math.inf
    table = np.column_stack([y, lam, dlam, ddlam])
    return ProfileCurve("parabolic-minimal", "y", table, (0.0, end), bool(at_end[-1]), meta)


def kext_zero_screw_profile(c: float, l: float, samples: int = 512) -> ProfileCurve:
    """n = 2 screw surfaces with vanishing extrinsic curvature.

    lambda = -sqrt(c) ln(sqrt(c) + s) + sqrt(c) ln(l y) + s with s = sqrt(c - l^2 y^2),
    defined on 0 < y <= sqrt(c)/l. The last sample is the endpoint, where
    dlambda = 0 and ddlambda is infinite.
    """
    if not c > 0 or not l > 0:
        raise DomainError("c and l must be positive")
    end = math.sqrt(c) / l
    y = _y_grid(0.0, end, samples, True)
    y[-1] = end
    s = np.sqrt(np.maximum(c - (l * y) ** 2, 0.0))
    rc = math.sqrt(c)
    lam = -rc * np.log(rc + s) + rc * np.log(l * y) + s
    dlam = s / y
    with np.errstate(divide="ignore"):
        ddlam = -c / (s * y**2)
    meta = {"n": 2, "r": 2, "target_kind": "S_r", "target": 0.0, "constant": "c", "c": c, "l": [l]}
    return ProfileCurve("screw-flat", "y", np.column_stack([y, lam, dlam, ddlam]), (0.0, end), False, meta)


def kext_zero_screw_slope(c: float, l: float, y):
    """dlambda = sqrt(c - l^2 y^2) / y."""
    y = np.asarray(y, dtype=float)
    return np.sqrt(np.maximum(c - (l * y) ** 2, 0.0)) / y


def entire_h2_log_constant(n: int, k: float) -> float:
    """Slope c for which lambda = c ln y has constant H_2 = k (n >= 3)."""
    if n < 3:
        raise DomainError("entire log graphs with H_2 > 0 need n >= 3")
    if not 0 < k < (n - 2) / n:
        raise DomainError(f"k must lie in (0, {(n - 2) / n}) for n={n}, got {k}")
    return math.sqrt(n * k / ((n - 2) - n * k))


def entire_log_profile(n: int, k: float, samples: int = 512,
                       y_range: tuple[float, float] = (0.1, 10.0)) -> ProfileCurve:
    c = entire_h2_log_constant(n, k)
    lo, hi = y_range
    if not 0 < lo < hi:
        raise DomainError("y range must satisfy 0 < y_min < y_max")
    y = _y_grid(lo, hi, samples, False)
    meta = {"n": n, "r": 2, "target_kind": "H_r", "target": k, "constant": "c", "c": c,
            "l": [0.0] * (n - 1)}
    table = np.column_stack([y, c * np.log(y), c / y, -c / y**2])
    return ProfileCurve("entire-log", "y", table, (0.0, math.inf), False, meta)


def screw_profile_sr(n: int, r: int, y, dlam, ddlam):
    """S_r of t = lambda(y) in the half-space, from the l = 0 reduction.

    With k = -dlambda/y (the n-1 equal diagonal entries of V) and
    v = ddlambda + dlambda/y, S_r W^{r+2} / y^{2r}
    = C(n-1, r) W^2 k^r + C(n-1, r-1) k^{r-1} v.
    """
    y, dlam, ddlam = (np.asarray(v, dtype=float) for v in (y, dlam, ddlam))
    w2 = 1.0 + y * y * dlam * dlam
    k = -dlam / y
    v = ddlam + dlam / y
    val = comb(n - 1, r) * w2 * k**r + comb(n - 1, r - 1) * k ** (r - 1) * v
    return val * y ** (2 * r) / w2 ** ((r + 2) / 2)


def verify_screw_profile(curve: ProfileCurve, points: int | None = None) -> CurvatureReport:
    """S_r of the screw graph at interior samples against the declared constant."""
    meta = curve.metadata
    n, r = int(meta["n"]), int(meta["r"])
    l = np.asarray(meta.get("l", [0.0] * (n - 1)), dtype=float)
    target = float(meta["target"])
    scale = comb(n, r) if meta.get("target_kind") == "H_r" else 1
    idx = np.flatnonzero(curve.finite_mask())
    idx = idx[(idx > 0) & (idx < len(curve.t) - 1)]
    if points is not None and idx.size > points:
        idx = idx[np.linspace(0, idx.size - 1, points).round().astype(int)]
    sr, res = [], []
    for i in idx:
        y, lam, dl, ddl = curve.samples[i]
        jet = screw_graph_jet(y, lam, dl, ddl, l)
        F, gF = half_space_factor(n, y)
        s = sr_minor_formula(jet, F, gF, r)
        sr.append(s)
        res.append(s - target * scale)
    sr = np.array(sr)
    return CurvatureReport(
        residual=np.array(res),
        points=curve.t[idx],
        sr=sr,
        hr=sr / comb(n, r),
        tolerance=1e-7,
        label=f"{curve.family} S_{r}",
    )


# --------------------------------------------------------------------------
# first-integral ODE for r = 2


def _recover(spec: ScrewSpec, y, psi):
    """lambda-dot^2 = N/D from psi = (z/W^2) y^{4-n}; returns (L, N, D)."""
    n, l2 = spec.n, spec.l2
    num = l2 * y ** (4 - n) - psi * (1.0 + y * y * l2)
    den = psi * y * y - (n - 1) * y ** (4 - n)
    return num / den, num, den


def _rhs(spec: ScrewSpec, y, psi, den_sign):
    n, l2 = spec.n, spec.l2
    L, _, den = _recover(spec, y, psi)
    if den == 0 or (den > 0) != den_sign:
        raise SingularDomainError(f"recovery denominator vanishes near y={y}")
    if L < 0:
        raise DomainExhaustedError(f"lambda-dot^2 < 0 at y={y}")
    w2 = 1.0 + y * y * (l2 + L)
    dpsi = (2 - n) * l2 * y ** (3 - n) / w2 - 2.0 * spec.s_target * y ** (1 - n)
    return dpsi, math.sqrt(L)


def _rk4(spec: ScrewSpec, psi0, grid, den_sign):
    psi = np.empty_like(grid)
    lam = np.empty_like(grid)
    psi[0], lam[0] = psi0, 0.0
    for i in range(grid.size - 1):
        y, h = grid[i], grid[i + 1] - grid[i]
        p, q = psi[i], lam[i]
        try:
            k1 = _rhs(spec, y, p, den_sign)
            k2 = _rhs(spec, y + h / 2, p + h / 2 * k1[0], den_sign)
            k3 = _rhs(spec, y + h / 2, p + h / 2 * k2[0], den_sign)
            k4 = _rhs(spec, y + h, p + h * k3[0], den_sign)
        except (SingularDomainError, DomainExhaustedError) as exc:
            raise type(exc)(str(exc), last_valid=float(y)) from None
        psi[i + 1] = p + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        lam[i + 1] = q + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return psi, lam


def screw_ode_solve(spec: ScrewSpec, d: float, y0: float, y1: float, steps: int = 256,
                    tol: float = 1e-9, max_steps: int = 2**18) -> ProfileCurve:
    """Integrate the r = 2 first integral for psi = (z/W^2) y^{4-n}, z = l^2 + (n-1) lambda-dot^2.

    psi' = (2-n) l^2 y^{3-n} / W^2 - 2 S_2 y^{1-n}, started from psi(y0) = d.
    lambda-dot^2 and W^2 are recovered algebraically from psi at every stage;
    lambda is integrated alongside with lambda(y0) = 0 on the branch
    lambda-dot >= 0. Classical RK4 with the step count doubled until two
    successive runs agree to ``tol`` at the output nodes.
    """
    if spec.r != 2:
        raise ValidationError("the screw first integral is only available for r = 2")
    if y0 <= 0 or y1 <= 0:
        raise DomainError("half-space heights must be positive")
    if y0 == y1:
        raise ValidationError("y0 and y1 must differ")
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    _, _, den0 = _recover(spec, y0, d)
    if den0 == 0:
        raise SingularDomainError(f"recovery denominator vanishes at y0={y0}", last_valid=None)
    den_sign = den0 > 0

    coarse = np.linspace(y0, y1, steps + 1)
    m = steps
    psi, lam = _rk4(spec, d, coarse, den_sign)
    while True:
        m *= 2
        if m > max_steps:
            raise NumericalFailure(f"screw ODE did not reach tolerance {tol} with {max_steps} steps")
        fine_psi, fine_lam = _rk4(spec, d, np.linspace(y0, y1, m + 1), den_sign)
        stride = m // steps
        fp, fl = fine_psi[::stride], fine_lam[::stride]
        gap = max(np.max(np.abs(fp - psi)), np.max(np.abs(fl - lam)))
        psi, lam = fp, fl
        if gap <= tol:
            break

    L, num, den = _recover(spec, coarse, psi)
    dlam = np.sqrt(L)
    n, l2 = spec.n, spec.l2
    w2 = 1.0 + coarse**2 * (l2 + L)
    dpsi = (2 - n) * l2 * coarse ** (3 - n) / w2 - 2.0 * spec.s_target * coarse ** (1 - n)
    dnum = (4 - n) * l2 * coarse ** (3 - n) - dpsi * (1 + coarse**2 * l2) - 2 * psi * coarse * l2
    dden = dpsi * coarse**2 + 2 * psi * coarse - (n - 1) * (4 - n) * coarse ** (3 - n)
    dL = (dnum * den - num * dden) / den**2
    with np.errstate(divide="ignore", invalid="ignore"):
        ddlam = dL / (2.0 * dlam)
    table = np.column_stack([coarse, lam, dlam, ddlam])
    if y1 < y0:
        table = table[::-1]
    meta = {"n": n, "r": 2, "target_kind": "S_r", "target": spec.s_target, "constant": "d", "d": d,
            "y0": y0, "l": list(spec.l), "psi_final": float(psi[-1]), "ode_steps": m}
    lo, hi = sorted((y0, y1))
    return ProfileCurve("screw-ode", "y", table, (lo, hi), False, meta)
