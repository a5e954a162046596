"""r-mean curvature of vertical graphs t = u(x) over a conformally flat model.

The metric on the base is |dx|^2 / F^2. Three routes to S_r are provided: the
spectrum of the shape operator built from the fundamental forms, the sums of
r x r minors of V = W * II, and (on grids) the divergence form of
(r+1) S_{r+1} evaluated with centred finite differences.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np

from .ambient import AmbientSpec, Model, conformal_factor, ricci_conformal
from .errors import DomainError, GridSizeError, NumericalFailure, RangeError, ValidationError
from .report import CurvatureReport
from .symfunc import (
    PrincipalCurvatures,
    SelfAdjointOperator,
    elementary_symmetric_all,
    newton_tensors,
)

SCHEMA = 1


@dataclass(frozen=True)
class GraphJet:
    """Value, Euclidean gradient and Hessian of u at a point."""

    u: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grad, dtype=float).ravel()
        h = np.asarray(self.hess, dtype=float)
        if h.shape != (g.size, g.size):
            raise ValidationError("Hessian shape does not match gradient")
        scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
        if np.max(np.abs(h - h.T)) > 1e-12 * scale:
            raise ValidationError("Hessian is not symmetric")
        object.__setattr__(self, "grad", g)
        object.__setattr__(self, "hess", 0.5 * (h + h.T))

    @property
    def n(self) -> int:
        return self.grad.size

    def W(self, F: float) -> float:
        return float(np.sqrt(1.0 + F * F * self.grad @ self.grad))


def _check_F(F):
    if np.any(np.asarray(F) <= 0):
        raise DomainError("conformal factor must be positive")


def _v_matrix(grad, hess, F, grad_F):
    """V_ij = u_ij + (u_i F_j + u_j F_i - (u . grad F) delta_ij) / F, batched."""
    n = grad.shape[-1]
    outer = grad[..., :, None] * grad_F[..., None, :]
    dot = np.sum(grad * grad_F, axis=-1)
    F = np.asarray(F, dtype=float)[..., None, None]
    return hess + (outer + np.swapaxes(outer, -1, -2) - dot[..., None, None] * np.eye(n)) / F


def _forms(grad, hess, F, grad_F):
    n = grad.shape[-1]
    F = np.asarray(F, dtype=float)
    W = np.sqrt(1.0 + F**2 * np.sum(grad * grad, axis=-1))
    uu = grad[..., :, None] * grad[..., None, :]
    Fe, We = F[..., None, None], W[..., None, None]
    first = np.eye(n) / Fe**2 + uu
    second = _v_matrix(grad, hess, F, grad_F) / We
    first_inv = Fe**2 * np.eye(n) - Fe**4 * uu / We**2
    return first, second, first_inv, W


def fundamental_forms(jet: GraphJet, F, grad_F):
    """Matrices of I, II and I^{-1} of the graph in the Euclidean coordinate frame.

    II is taken with respect to the upward unit normal. Raises NumericalFailure
    if the closed-form inverse does not invert I to 1e-10.
    """
    _check_F(F)
    first, second, first_inv, _ = _forms(jet.grad, jet.hess, F, np.asarray(grad_F, dtype=float))
    err = np.max(np.abs(first @ first_inv - np.eye(jet.n)))
    if err > 1e-10:
        raise NumericalFailure(f"I * I^-1 deviates from identity by {err:.3e}")
    return first, second, first_inv


def coordinate_shape_operator(jet: GraphJet, F, grad_F) -> np.ndarray:
    """[A] = I^{-1} II in the coordinate frame (not symmetric in general)."""
    _, second, first_inv = fundamental_forms(jet, F, grad_F)
    return first_inv @ second


def _orthonormal_frame_operator(first, second):
    """Shape operator in an I-orthonormal frame: L^{-1} II L^{-T} with I = L L^T."""
    low = np.linalg.cholesky(first)
    x = np.linalg.solve(low, second)
    m = np.swapaxes(np.linalg.solve(low, np.swapaxes(x, -1, -2)), -1, -2)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def shape_operator(jet: GraphJet, F, grad_F) -> SelfAdjointOperator:
    """Shape operator as a symmetric matrix in an I-orthonormal frame.

    It is similar to I^{-1} II, so its eigenvalues are the principal
    curvatures for the upward normal.
    """
    first, second, _ = fundamental_forms(jet, F, grad_F)
    return SelfAdjointOperator(_orthonormal_frame_operator(first, second))


def graph_principal_curvatures(jet: GraphJet, F, grad_F) -> PrincipalCurvatures:
    return PrincipalCurvatures(shape_operator(jet, F, grad_F).eigenvalues())


def spectral_sr(jet: GraphJet, F, grad_F, r: int) -> float:
    if not 1 <= r <= jet.n:
        raise RangeError(f"r={r} outside 1..{jet.n}")
    return float(elementary_symmetric_all(graph_principal_curvatures(jet, F, grad_F).values)[r])


def sr_minor_formula(jet: GraphJet, F, grad_F, r: int) -> float:
    """S_r from the two sums of r x r minors of V = W * II.

    S_r W^{r+2} / F^{2r} = sum_J (W^2 - F^2 sum_{j in J} u_j^2) det V[J, J]
                           - 2 F^2 sum_{i<k} u_i u_k sum_T det V[{i} + T, {k} + T]
    where J runs over r-subsets and T over (r-1)-subsets avoiding i and k.
    """
    n = jet.n
    if not 1 <= r <= n:
        raise RangeError(f"r={r} outside 1..{n}")
    _check_F(F)
    F = float(F)
    grad_F = np.asarray(grad_F, dtype=float)
    u = jet.grad
    v = _v_matrix(u, jet.hess, F, grad_F)
    W2 = 1.0 + F * F * (u @ u)
    total = 0.0
    for J in combinations(range(n), r):
        idx = list(J)
        minor = np.linalg.det(v[np.ix_(idx, idx)]) if r > 1 else v[idx[0], idx[0]]
        total += (W2 - F * F * np.sum(u[idx] ** 2)) * minor
    cross = 0.0
    for i, k in combinations(range(n), 2):
        if u[i] == 0.0 or u[k] == 0.0:
            continue
        rest = [j for j in range(n) if j not in (i, k)]
        acc = 0.0
        for T in combinations(rest, r - 1):
            rows = [i, *T]
            cols = [k, *T]
            acc += np.linalg.det(v[np.ix_(rows, cols)]) if r > 1 else v[i, k]
        cross += u[i] * u[k] * acc
    total -= 2.0 * F * F * cross
    return float(total * F ** (2 * r) / W2 ** ((r + 2) / 2))


def j_constant_curvature(a, r: int, v, z, c: float = -1.0) -> float:
    """J_r(v, z) = c (n-r) <P_{r-1} v, z> for an ambient of constant curvature c.

    ``a`` is the shape operator in an orthonormal frame and v, z are
    components in that frame.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    if not 1 <= r <= n:
        raise RangeError(f"r={r} outside 1..{n}")
    ps, _ = newton_tensors(a, r - 1)
    return float(c * (n - r) * np.asarray(v) @ ps[r - 1] @ np.asarray(z))


def screw_graph_jet(y: float, lam: float, dlam: float, ddlam: float, l) -> GraphJet:
    """Jet at (0, ..., 0, y) of u = lam(y) + l . (x_1, ..., x_{n-1}) in the half-space."""
    if y <= 0:
        raise DomainError(f"half-space height must be positive, got {y}")
    l = np.atleast_1d(np.asarray(l, dtype=float))
    n = l.size + 1
    grad = np.append(l, dlam)
    hess = np.zeros((n, n))
    hess[-1, -1] = ddlam
    return GraphJet(float(lam), grad, hess)


def half_space_factor(n: int, y: float):
    """F and grad F of the half-space model at height y."""
    spec = AmbientSpec(n, Model.HALF_SPACE)
    F, grad_F, _ = conformal_factor(spec, np.append(np.zeros(n - 1), y))
    return F, grad_F


# --------------------------------------------------------------------------
# Grid samples and the divergence-form residual


@dataclass
class GraphSample:
    """Values of u on a uniform rectangular lattice in model coordinates."""

    spec: AmbientSpec
    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float).ravel()
        self.spacing = np.asarray(self.spacing, dtype=float).ravel()
        self.values = np.asarray(self.values, dtype=float)
        n = self.spec.n
        if self.origin.size != n or self.spacing.size != n or self.values.ndim != n:
            raise ValidationError("grid dimensions do not match the ambient dimension")
        if np.any(self.spacing <= 0):
            raise ValidationError("grid spacing must be positive")
        if not np.all(self.spec.contains(self.points())):
            raise ValidationError("grid is not strictly inside the model domain")

    @classmethod
    def from_function(cls, spec: AmbientSpec, origin, spacing, shape, func):
        """Sample ``func(points)`` where points has a trailing axis of length n."""
        origin = np.asarray(origin, dtype=float)
        spacing = np.asarray(spacing, dtype=float)
        axes = [origin[i] + spacing[i] * np.arange(shape[i]) for i in range(spec.n)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return cls(spec, origin, spacing, np.asarray(func(pts), dtype=float))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def axes(self) -> list[np.ndarray]:
        return [self.origin[i] + self.spacing[i] * np.arange(self.shape[i]) for i in range(self.spec.n)]

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    # -- serialisation ---------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "schema": SCHEMA,
            "kind": "graph-sample",
            "n": self.spec.n,
            "model": self.spec.model.value,
            "origin": self.origin.tolist(),
            "spacing": self.spacing.tolist(),
            "shape": list(self.shape),
            "values": self.values.ravel(order="C").tolist(),
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GraphSample":
        d = json.loads(text)
        if d.get("kind") != "graph-sample":
            raise ValidationError("not a graph-sample document")
        spec = AmbientSpec(int(d["n"]), Model(d["model"]))
        values = np.asarray(d["values"], dtype=float).reshape(d["shape"], order="C")
        return cls(spec, d["origin"], d["spacing"], values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# model: {self.spec.model.value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x_{i + 1}" for i in range(self.spec.n)] + ["u"])
        pts = self.points().reshape(-1, self.spec.n)
        for p, val in zip(pts, self.values.ravel(order="C")):
            w.writerow([repr(float(c)) for c in p] + [repr(float(val))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GraphSample":
        model = Model.HALF_SPACE
        lines = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                if key.strip() == "model":
                    model = Model(val.strip())
            elif line.strip():
                lines.append(line)
        rows = list(csv.reader(lines))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        n = len(header) - 1
        coords, vals = body[:, :n], body[:, n]
        axes = [np.unique(coords[:, i]) for i in range(n)]
        shape = tuple(a.size for a in axes)
        if np.prod(shape) != vals.size:
            raise ValidationError("CSV points do not form a full rectangular grid")
        spacing = []
        for a in axes:
            d = np.diff(a)
            if d.size == 0 or np.max(np.abs(d - d.mean())) > 1e-9 * max(1.0, abs(d.mean())):
                raise ValidationError("CSV grid spacing is not uniform")
            spacing.append(d.mean())
        order = np.lexsort(coords.T[::-1])
        values = vals[order].reshape(shape, order="C")
        return cls(AmbientSpec(n, model), [a[0] for a in axes], spacing, values)

    @classmethod
    def load(cls, path) -> "GraphSample":
        path = Path(path)
        text = path.read_text()
        return cls.from_json(text) if path.suffix.lower() == ".json" else cls.from_csv(text)

    def save(self, path):
        path = Path(path)
        path.write_text(self.to_json() if path.suffix.lower() == ".json" else self.to_csv())


def _shifted(arr, margin, offsets):
    """View of ``arr`` on the margin-``margin`` interior, shifted by ``offsets``."""
    sl = []
    for ax, off in enumerate(offsets):
        size = arr.shape[ax]
        sl.append(slice(margin + off, size - margin + off))
    return arr[tuple(sl)]


def _finite_difference_jets(values, spacing):
    """Centred second-order gradient and Hessian on the one-cell interior."""
    n = values.ndim
    zero = [0] * n
    grad, hess = [], np.empty(tuple(s - 2 for s in values.shape) + (n, n))
    centre = _shifted(values, 1, zero)
    for i in range(n):
        e = list(zero)
        e[i] = 1
        plus = _shifted(values, 1, e)
        e[i] = -1
        minus = _shifted(values, 1, e)
        grad.append((plus - minus) / (2 * spacing[i]))
        hess[..., i, i] = (plus - 2 * centre + minus) / spacing[i] ** 2
        for j in range(i + 1, n):
            acc = 0.0
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                e = list(zero)
                e[i], e[j] = si, sj
                acc = acc + si * sj * _shifted(values, 1, e)
            hess[..., i, j] = hess[..., j, i] = acc / (4 * spacing[i] * spacing[j])
    return np.stack(grad, axis=-1), hess


def divergence_residual(sample: GraphSample, r: int) -> CurvatureReport:
    """Residual of the divergence form of (r+1) S_{r+1} on the grid interior.

    (r+1) S_{r+1} = F^2 div(P_r grad u / W) + (2-n) F <P_r grad u, grad F> / W
                    - (n-r) F^2 <P_{r-1} grad u / W, grad u / W>

    The left side is evaluated from the spectrum of the shape operator; the
    divergence is a centred difference of the field P_r grad u / W. Jets come
    from centred differences of the sampled u, so the residual is O(h^2).
    Points within two cells of the boundary are excluded.
    """
    n = sample.spec.n
    if not 0 <= r <= n - 1:
        raise RangeError(f"need 1 <= r+1 <= n, got r={r}")
    if min(sample.shape) < 5:
        raise GridSizeError("divergence residual needs at least 5 points per axis")
    h = sample.spacing
    grad, hess = _finite_difference_jets(sample.values, h)
    pts = sample.points()[(slice(1, -1),) * n]
    F, grad_F, hess_F = conformal_factor(sample.spec, pts)
    first, second, first_inv, W = _forms(grad, hess, F, grad_F)
    a = first_inv @ second
    ps, _ = newton_tensors(a, r)
    p_r = ps[r]
    p_prev = ps[r - 1] if r >= 1 else np.zeros_like(p_r)

    p_grad = np.einsum("...ij,...j->...i", p_r, grad)
    field = p_grad / W[..., None]
    div = 0.0
    zero = [0] * n
    for i in range(n):
        e = list(zero)
        e[i] = 1
        plus = _shifted(field[..., i], 1, e)
        e[i] = -1
        minus = _shifted(field[..., i], 1, e)
        div = div + (plus - minus) / (2 * h[i])

    inner = (slice(1, -1),) * n
    Fi, gFi, Wi = F[inner], grad_F[inner], W[inner]
    unit = grad[inner] / Wi[..., None]
    prev_term = np.einsum("...i,...ij,...j->...", unit, p_prev[inner], unit)
    rhs = (Fi**2 * div
           + (2 - n) * Fi * np.sum(p_grad[inner] * gFi, axis=-1) / Wi
           - (n - r) * Fi**2 * prev_term)

    k = np.linalg.eigvalsh(_orthonormal_frame_operator(first[inner], second[inner]))
    s_next = elementary_symmetric_all(k)[..., r + 1]
    residual = (r + 1) * s_next - rhs

    report = CurvatureReport(
        residual=residual,
        points=pts[inner],
        sr=s_next,
        hr=s_next / comb(n, r + 1),
        label=f"divergence-residual r+1={r + 1}",
    )
    if r == 1:
        # the constant-curvature closed form of the curvature term against
        # the conformal Ricci formula
        v = (Fi**2)[..., None] * unit
        ric = ricci_conformal(n, Fi, gFi, hess_F[inner])
        via_ricci = np.einsum("...i,...ij,...j->...", v, ric, v)
        closed = -(n - 1) * Fi**2 * np.sum(unit * unit, axis=-1)
        gap = float(np.max(np.abs(via_ricci - closed), initial=0.0))
        report.checks["ricci_crosscheck"] = gap
        report.flags["ricci_crosscheck"] = gap <= 1e-9
    return report


def _restrict_to_coarse(report: CurvatureReport, level: int, coarse_shape) -> np.ndarray:
    """Residual values of a refined grid at the interior nodes of the coarsest grid."""
    step = 2**level
    idx = tuple(slice(step * 2 - 2, step * (s - 3) - 2 + 1, step) for s in coarse_shape)
    return report.residual[idx]


def convergence_orders(samples: list[GraphSample], r: int):
    """Observed orders log2(RMS_h / RMS_{h/2}) over nested grids.

    Each sample must halve the spacing of the previous one on the same box.
    RMS values are taken over the interior nodes of the coarsest grid so
    that all levels measure the same set of points.
    """
    if len(samples) < 2:
        raise ValidationError("need at least two resolutions")
    base = samples[0]
    reports, rms = [], []
    for level, s in enumerate(samples):
        expected = tuple(2**level * (m - 1) + 1 for m in base.shape)
        if s.shape != expected or not np.allclose(s.origin, base.origin) \
                or not np.allclose(s.spacing * 2**level, base.spacing):
            raise ValidationError("samples are not nested refinements of the first grid")
        rep = divergence_residual(s, r)
        reports.append(rep)
        vals = _restrict_to_coarse(rep, level, base.shape)
        rms.append(float(np.sqrt(np.mean(vals**2))))
    orders = [float(np.log2(rms[i] / rms[i + 1])) for i in range(len(rms) - 1)]
    return orders, rms, reports
