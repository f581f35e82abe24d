"""Lorentz functionals evaluated exactly on step distribution functions.

For ``1 < p < inf`` and ``0 < q < inf``

    ||u||_{p,q}^q = p * int_0^inf (t |{|u| > t}|^{1/p})^q dt / t,

and ``||u||_{p,inf} = sup_t t |{|u| > t}|^{1/p}``.  A sampled field has a
piecewise constant distribution function, so the integral is a finite sum;
no quadrature is involved anywhere in this module.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gamma

from .grid import SampledField, magnitude

__all__ = [
    "LorentzParams",
    "DistributionProfile",
    "distribution_profile",
    "lorentz_norm",
    "ball_volume",
    "sphere_area",
    "radial_step_lorentz_exact",
    "radial_step_lorentz_log",
]


@dataclass(frozen=True)
class LorentzParams:
    p: float
    q: float

    def __post_init__(self):
        if not self.p > 1 or np.isinf(self.p):
            raise ValueError(f"Lorentz exponent p must lie in (1, inf), got {self.p}")
        if not self.q > 0:
            raise ValueError(f"Lorentz exponent q must be positive or inf, got {self.q}")


@dataclass(frozen=True, eq=False)
class DistributionProfile:
    """``measures[j]`` is ``|{|u| > t}|`` for ``t`` in ``[levels[j-1], levels[j])``, ``levels[-1] = 0``."""

    levels: np.ndarray
    measures: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.levels, dtype=float)
        lam = np.asarray(self.measures, dtype=float)
        if t.shape != lam.shape or t.ndim != 1:
            raise ValueError("levels and measures must be 1-d arrays of equal length")
        if t.size and (t[0] <= 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("levels must be positive and strictly increasing")
        if lam.size and (lam[-1] < 0 or np.any(np.diff(lam) > 0)):
            raise ValueError("measures must be nonnegative and nonincreasing")
        object.__setattr__(self, "levels", t)
        object.__setattr__(self, "measures", lam)

    def __len__(self) -> int:
        return self.levels.size

    @property
    def support_measure(self) -> float:
        return float(self.measures[0]) if len(self) else 0.0

    def scaled(self, c: float) -> "DistributionProfile":
        return DistributionProfile(c * self.levels, self.measures)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "measure"])
            for t, lam in zip(self.levels, self.measures):
                w.writerow([repr(float(t)), repr(float(lam))])
        return path


def distribution_profile(f: SampledField) -> DistributionProfile:
    """Exact distribution function of the pointwise magnitude of ``f``."""
    a = np.sort(magnitude(f).ravel())
    a = a[a > 0]
    if a.size == 0:
        return DistributionProfile(np.empty(0), np.empty(0))
    first = np.flatnonzero(np.r_[True, a[1:] != a[:-1]])
    counts_above = a.size - first
    return DistributionProfile(a[first], counts_above * f.grid.cell_volume)


def lorentz_norm(profile: DistributionProfile, params: LorentzParams) -> float:
    p, q = params.p, params.q
    if len(profile) == 0:
        return 0.0
    t, lam = profile.levels, profile.measures
    if np.isinf(q):
        return float(np.max(t * lam ** (1.0 / p)))
    tq = t**q
    dt_q = np.diff(np.r_[0.0, tq])
    total = (p / q) * np.sum(lam ** (q / p) * dt_q)
    return float(total ** (1.0 / q))


def ball_volume(d: int) -> float:
    """Volume of the unit ball in ``R^d``."""
    return float(np.pi ** (d / 2) / gamma(d / 2 + 1))


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in ``R^d``; perimeter of ``B(0, r)`` is this times ``r^(d-1)``."""
    return d * ball_volume(d)


def _log_diff_pow(log_hi: np.ndarray, log_lo: np.ndarray, q: float) -> np.ndarray:
    """``log(hi^q - lo^q)`` without forming the powers; ``log_lo = -inf`` allowed."""
    return q * log_hi + np.log(-np.expm1(q * (log_lo - log_hi)))


def radial_step_lorentz_log(
    log_heights: np.ndarray,
    log_radii: np.ndarray,
    d: int,
    params: LorentzParams,
) -> float:
    """Logarithm of ``||u||_{p,q}^q`` (or of ``||u||_{p,inf}``) for ``u = sum h_i chi_{B(0, r_i)}``.

    Works from logarithms so sequences with heights like ``2**1024`` stay
    finite.  Radii must be strictly decreasing.
    """
    log_h = np.asarray(log_heights, dtype=float)
    log_r = np.asarray(log_radii, dtype=float)
    if log_h.shape != log_r.shape or log_h.ndim != 1:
        raise ValueError("heights and radii must be 1-d arrays of equal length")
    if log_h.size == 0:
        return -np.inf
    if np.any(np.diff(log_r) >= 0):
        raise ValueError("radii must be strictly decreasing")
    p, q = params.p, params.q
    # partial sums H_i of the heights, then the level-set measure on [H_{i-1}, H_i)
    log_H = np.logaddexp.accumulate(log_h)
    log_H_prev = np.r_[-np.inf, log_H[:-1]]
    log_lam = np.log(ball_volume(d)) + d * log_r
    if np.isinf(q):
        return float(np.max(log_H + log_lam / p))
    terms = np.log(p / q) + (q / p) * log_lam + _log_diff_pow(log_H, log_H_prev, q)
    return float(np.logaddexp.reduce(terms))


def radial_step_lorentz_exact(
    heights: np.ndarray,
    radii: np.ndarray,
    d: int,
    params: LorentzParams,
) -> float:
    """Exact ``L^{p,q}`` norm of ``sum_i h_i chi_{B(0, r_i)}`` with ``r_1 > r_2 > ...``."""
    h = np.asarray(heights, dtype=float)
    r = np.asarray(radii, dtype=float)
    if np.any(h <= 0):
        raise ValueError("heights must be positive")
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    if np.any(np.diff(r) >= 0):
        raise ValueError("radii must be strictly decreasing")
    val = radial_step_lorentz_log(np.log(h), np.log(r), d, params)
    if np.isinf(params.q):
        return float(np.exp(val))
    return float(np.exp(val / params.q))
