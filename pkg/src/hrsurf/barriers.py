"""Height and slope constants from the critical entire rotational graph.

The barrier is the entire graph with H_r = (n-r)/n. Over a ball of
hyperbolic radius R its cap has depth lambda(R), and its slope where it
meets the sphere of radius R is lambda-dot(R) = sqrt(p(R)/q(R)).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, RangeError
from .rotational import RotationalSpec, solver


@dataclass(frozen=True)
class BarrierQuery:
    n: int
    r: int
    R: float

    def __post_init__(self):
        if not self.n > self.r:
            raise RangeError(f"barriers need n > r (no entire critical graph for n={self.n}, r={self.r})")
        if self.r < 1:
            raise RangeError("r must be >= 1")
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R}")

    @property
    def spec(self) -> RotationalSpec:
        return RotationalSpec(self.n, self.r, Fraction(self.n - self.r, self.n))


def height_bound(q: BarrierQuery) -> float:
    """lambda(R) for the critical entire graph."""
    return float(solver(q.spec).lam(q.R)[0])


def gradient_bound(q: BarrierQuery) -> float:
    """lambda-dot(R) for the critical entire graph.

    The existence statement this stands in for gives no formula; the slope of
    the barrier at the contact sphere is the constant its argument produces.
    """
    return float(solver(q.spec).derivatives(q.R)[0][0])


def bounds(q: BarrierQuery) -> dict:
    return {"n": q.n, "r": q.r, "R": q.R, "height_bound": height_bound(q), "gradient_bound": gradient_bound(q)}
