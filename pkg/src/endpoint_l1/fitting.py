"""Log-log slope fits for scaling experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

__all__ = ["SlopeFit", "loglog_slope", "linear_fit"]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    n: int
    stderr: float = 0.0

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.slope - 1.96 * self.stderr, self.slope + 1.96 * self.stderr)

    def within(self, target: float, tol: float) -> bool:
        return abs(self.slope - target) <= tol

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2, "n": self.n,
                "stderr": self.stderr, "ci95": list(self.ci95)}


def linear_fit(x, y) -> SlopeFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.shape != y.shape:
        raise ValueError("need at least two paired samples")
    res = linregress(x, y)
    stderr = float(res.stderr) if x.size > 2 else 0.0
    return SlopeFit(float(res.slope), float(res.intercept), float(res.rvalue**2), int(x.size), stderr)


def loglog_slope(x, y) -> SlopeFit:
    """Least-squares slope of ``log y`` against ``log x``; all samples must be positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive samples")
    return linear_fit(np.log(x), np.log(y))
