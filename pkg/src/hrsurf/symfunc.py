"""Elementary symmetric functions, r-mean curvatures and Newton tensors."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import RangeError, ValidationError
from .report import CurvatureReport

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class PrincipalCurvatures:
    """Principal curvatures k_1..k_n of a hypersurface at a point.

    ``orientation`` names the unit normal the values refer to ("upward" for
    vertical graphs, which is also the convention of the rotational formulas).
    """

    values: np.ndarray
    orientation: str = "upward"

    def __post_init__(self):
        k = np.asarray(self.values, dtype=float).ravel()
        if k.size < 2:
            raise ValidationError("need at least two principal curvatures")
        if not np.all(np.isfinite(k)):
            raise ValidationError("principal curvatures must be finite")
        object.__setattr__(self, "values", k)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SelfAdjointOperator:
    """Symmetric n x n matrix (a shape operator or Newton tensor in an orthonormal frame)."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", symmetrize(self.matrix))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def symmetrize(a, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Return (A + A^T)/2 after checking A is symmetric to ``rtol`` relative."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.max(np.abs(a)), 1.0) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > rtol * scale:
        raise ValidationError("matrix is not symmetric within tolerance")
    return 0.5 * (a + a.T)


def _values(k) -> np.ndarray:
    if isinstance(k, PrincipalCurvatures):
        return k.values
    return np.asarray(k, dtype=float)


def elementary_symmetric_all(k) -> np.ndarray:
    """All of S_0..S_n as the coefficients of prod(1 + k_i t).

    Works along the last axis, so a batch of shape (..., n) gives (..., n+1).
    """
    k = _values(k)
    n = k.shape[-1]
    e = np.zeros(k.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        ki = k[..., i : i + 1]
        # update from the top so each coefficient uses the previous stage
        e[..., 1 : i + 2] = e[..., 1 : i + 2] + ki * e[..., 0 : i + 1]
    return e


def elementary_symmetric(k, r: int) -> float:
    """S_r(k) = sum over i_1 < ... < i_r of k_{i_1} ... k_{i_r}, with S_0 = 1."""
    k = _values(k)
    n = k.shape[-1]
    if not 0 <= r <= n:
        raise RangeError(f"r={r} outside 0..{n}")
    return elementary_symmetric_all(k)[..., r]


def normalized_hr(k, r: int):
    """H_r = S_r / binom(n, r)."""
    k = _values(k)
    n = k.shape[-1]
    if not 1 <= r <= n:
        raise RangeError(f"r={r} outside 1..{n}")
    return elementary_symmetric(k, r) / comb(n, r)


def partial_sr(k, r: int) -> np.ndarray:
    """dS_r/dk_i for every i, as S_{r-1} of k with entry i removed."""
    k = _values(k)
    n = k.size
    if not 1 <= r <= n:
        raise RangeError(f"r={r} outside 1..{n}")
    return np.array([elementary_symmetric(np.delete(k, i), r - 1) for i in range(n)])


def newton_tensors(a: np.ndarray, r: int) -> tuple[list[np.ndarray], list[float]]:
    """P_0..P_r and S_0..S_r of an arbitrary square matrix (batched over leading axes).

    S_j is obtained as trace(A P_{j-1}) / j, so no eigenvalues are needed and
    the recursion is valid for matrices that are only self-adjoint with
    respect to some other inner product.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    eye = np.broadcast_to(np.eye(n), a.shape)
    p = eye.copy()
    ps, ss = [p], [np.ones(a.shape[:-2])]
    for j in range(1, r + 1):
        s = np.trace(a @ p, axis1=-2, axis2=-1) / j
        p = s[..., None, None] * eye - a @ p
        ps.append(p)
        ss.append(s)
    return ps, ss


def newton_tensor(a, r: int) -> SelfAdjointOperator:
    """P_r = S_r I - A P_{r-1}, P_0 = I, for a symmetric operator A."""
    if isinstance(a, SelfAdjointOperator):
        a = a.matrix
    a = symmetrize(a)
    n = a.shape[0]
    if not 0 <= r <= n - 1:
        raise RangeError(f"r={r} outside 0..{n - 1}")
    s = elementary_symmetric_all(np.linalg.eigvalsh(a))
    p = np.eye(n)
    for j in range(1, r + 1):
        p = s[j] * np.eye(n) - a @ p
    return SelfAdjointOperator(0.5 * (p + p.T))


def _scale(k: np.ndarray, r: int) -> float:
    """Size of the terms entering S_r, used to make residuals relative."""
    if r < 0 or r > k.size:
        return 1.0
    return max(1.0, float(elementary_symmetric(np.abs(k), r)))


def identity_report(a) -> CurvatureReport:
    """Relative residuals of the three trace/derivative identities for every r.

    For each r the report carries |trace(P_r A) - (r+1) S_{r+1}|,
    |trace(P_r) - (n-r) S_r| and max_i |eig_i(P_{r-1}) - dS_r/dk_i|,
    each divided by the magnitude of the terms involved.
    """
    if isinstance(a, SelfAdjointOperator):
        a = a.matrix
    a = symmetrize(a)
    n = a.shape[0]
    k, vecs = np.linalg.eigh(a)
    s = elementary_symmetric_all(k)
    res_pa, res_tr, res_dk = [], [], []
    for r in range(n):
        p = newton_tensor(a, r).matrix
        res_pa.append(abs(np.trace(p @ a) - (r + 1) * s[r + 1]) / _scale(k, r + 1))
        res_tr.append(abs(np.trace(p) - (n - r) * s[r]) / _scale(k, r))
    for r in range(1, n + 1):
        p = newton_tensor(a, r - 1).matrix
        eig_in_basis = np.einsum("ji,jk,ki->i", vecs, p, vecs)
        res_dk.append(np.max(np.abs(eig_in_basis - partial_sr(k, r))) / _scale(k, r - 1))
    residual = np.array(res_pa + res_tr + res_dk)
    return CurvatureReport(
        residual=residual,
        sr=s,
        tolerance=1e-10,
        label="newton-identities",
        checks={
            "trace_PA": max(res_pa),
            "trace_P": max(res_tr),
            "partial_derivative": max(res_dk),
        },
    )


def positivity_chain(k, r: int) -> bool:
    """True when dS_j/dk_i > 0 for all i and all 1 <= j <= r.

    Equivalently P_0..P_{r-1} are positive definite, the ellipticity condition
    for the prescribed H_r problem.
    """
    k = _values(k)
    n = k.size
    if not 1 <= r <= n:
        raise RangeError(f"r={r} outside 1..{n}")
    return all(np.min(partial_sr(k, j)) > 0 for j in range(1, r + 1))
