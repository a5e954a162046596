"""Residual reports produced by the verification routines."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class CurvatureReport:
    """Per-point curvature values and residuals with summary statistics.

    ``residual`` is the signed residual field (any shape); ``points`` holds the
    matching coordinates with a trailing axis of length ``dim`` when present.
    ``checks`` collects named scalar diagnostics and ``flags`` named booleans.
    """

    residual: np.ndarray
    points: np.ndarray | None = None
    sr: np.ndarray | None = None
    hr: np.ndarray | None = None
    tolerance: float | None = None
    label: str = ""
    checks: dict[str, float] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        self.residual = np.asarray(self.residual, dtype=float)

    @property
    def min(self) -> float:
        return float(np.min(self.residual)) if self.residual.size else 0.0

    @property
    def max(self) -> float:
        return float(np.max(self.residual)) if self.residual.size else 0.0

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    @property
    def rms(self) -> float:
        if not self.residual.size:
            return 0.0
        return float(np.sqrt(np.mean(self.residual**2)))

    @property
    def argmax(self) -> tuple[int, ...]:
        """Index of the largest absolute residual."""
        if not self.residual.size:
            return ()
        return tuple(int(i) for i in np.unravel_index(np.argmax(np.abs(self.residual)), self.residual.shape))

    @property
    def argmax_location(self):
        if self.points is None or not self.residual.size:
            return None
        return np.asarray(self.points)[self.argmax]

    @property
    def passed(self) -> bool:
        ok = all(self.flags.values())
        if self.tolerance is not None:
            ok = ok and self.max_abs <= self.tolerance
        return bool(ok)

    def summary(self) -> dict[str, Any]:
        loc = self.argmax_location
        out = {
            "label": self.label,
            "count": int(self.residual.size),
            "min": self.min,
            "max": self.max,
            "max_abs": self.max_abs,
            "rms": self.rms,
            "argmax": list(self.argmax),
            "argmax_location": None if loc is None else np.atleast_1d(loc).tolist(),
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.checks:
            out["checks"] = {k: float(v) for k, v in self.checks.items()}
        if self.flags:
            out["flags"] = {k: bool(v) for k, v in self.flags.items()}
        return out
