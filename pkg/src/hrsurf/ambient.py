"""Half-space and ball models of hyperbolic n-space.

Both models carry the conformal metric ``|dx|^2 / F(x)^2``; everything
downstream only needs F together with its Euclidean gradient and Hessian.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

RHO_CAP = 700.0


class Model(enum.Enum):
    HALF_SPACE = "half-space"
    BALL = "ball"


@dataclass(frozen=True)
class AmbientSpec:
    n: int
    model: Model = Model.HALF_SPACE

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"dimension must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "model", Model(self.model))

    def contains(self, x) -> np.ndarray:
        """Boolean mask of points (trailing axis n) lying in the model domain."""
        x = np.asarray(x, dtype=float)
        if self.model is Model.HALF_SPACE:
            return x[..., -1] > 0
        return np.sum(x * x, axis=-1) < 1.0


def conformal_factor(spec: AmbientSpec, p):
    """F, grad F and Hess F at ``p`` (batched over leading axes).

    Half-space: F = y (last coordinate). Ball: F = (1 - |x|^2) / 2.
    """
    x = np.asarray(p, dtype=float)
    if x.shape[-1] != spec.n:
        raise ValidationError(f"point has {x.shape[-1]} coordinates, expected {spec.n}")
    if not np.all(spec.contains(x)):
        raise DomainError(f"point outside the {spec.model.value} model")
    n = spec.n
    batch = x.shape[:-1]
    if spec.model is Model.HALF_SPACE:
        f = x[..., -1].copy()
        grad = np.zeros(x.shape)
        grad[..., -1] = 1.0
        hess = np.zeros(batch + (n, n))
    else:
        f = 0.5 * (1.0 - np.sum(x * x, axis=-1))
        grad = -x.copy()
        hess = np.broadcast_to(-np.eye(n), batch + (n, n)).copy()
    if not batch:
        f = float(f)
    return f, grad, hess


def rho_to_ball_radius(rho: float, with_flag: bool = False):
    """Euclidean radius tanh(rho/2) of the hyperbolic sphere of radius rho about 0.

    Once tanh rounds to 1 (or rho exceeds RHO_CAP) the largest double below 1
    is returned; ``with_flag=True`` also returns whether that happened.
    """
    rho = float(rho)
    if rho < 0 or math.isnan(rho):
        raise DomainError(f"hyperbolic radius must be >= 0, got {rho}")
    s = math.tanh(0.5 * min(rho, RHO_CAP))
    saturated = s >= 1.0 or rho > RHO_CAP
    if saturated:
        s = math.nextafter(1.0, 0.0)
    return (s, saturated) if with_flag else s


def ball_radius_to_rho(s: float) -> float:
    """Hyperbolic distance 2 artanh(s) from the origin of the ball model."""
    s = float(s)
    if not 0.0 <= s < 1.0:
        raise DomainError(f"ball radius must lie in [0, 1), got {s}")
    return 2.0 * math.atanh(s)


def ricci_conformal(n: int, f, grad_f, hess_f) -> np.ndarray:
    """Ricci tensor of |dx|^2/F^2 in the coordinate basis.

    Ric_ij = (n-2) F_ij / F + (Lap F / F - (n-1) |grad F|^2 / F^2) delta_ij.
    For either hyperbolic model this equals -(n-1) delta_ij / F^2.
    """
    f = np.asarray(f, dtype=float)
    grad_f = np.asarray(grad_f, dtype=float)
    hess_f = np.asarray(hess_f, dtype=float)
    lap = np.trace(hess_f, axis1=-2, axis2=-1)
    g2 = np.sum(grad_f * grad_f, axis=-1)
    fe = f[..., None, None]
    diag = (lap / f - (n - 1) * g2 / f**2)[..., None, None]
    return (n - 2) * hess_f / fe + diag * np.eye(n)
