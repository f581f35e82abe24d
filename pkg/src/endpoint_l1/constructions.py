"""Extremal radial step functions and heat estimates for indicator gradients.

``u_N = sum_{i<=N} 2^i chi_{B(0, r_i)}`` with ``2^i r_i^{d-1} = i^{-1/q}`` keeps
``|Du_N|`` bounded while ``||u_N||_{L^{d/(d-1), q}}`` grows like a harmonic sum
for ``q < 1``.  Heights reach ``2^N`` and radii ``2^{-N}``, so everything is
kept in logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from .fitting import SlopeFit, linear_fit, loglog_slope
from .grid import GridSpec, SampledField, SpectralField, inverse_transform, lp_norm
from .heat import grad_heat_l1
from .lorentz import (
    LorentzParams,
    ball_volume,
    distribution_profile,
    lorentz_norm,
    radial_step_lorentz_log,
    sphere_area,
)

__all__ = [
    "RadialStepFunction",
    "alvino_sequence",
    "AlvinoReport",
    "alvino_divergence_check",
    "alvino_lower_bound",
    "riesz_counterexample_norms",
    "FinitePerimeterSet",
    "ball_fourier_transform",
    "SetHeatReport",
    "set_heat_estimates",
]


@dataclass(frozen=True)
class RadialStepFunction:
    """``sum_{i=1}^N h_i chi_{B(0, r_i)}`` with ``h_i = 2^i`` and ``2^i r_i^{d-1} = i^{-1/q}``."""

    N: int
    q: float
    d: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        if not 0 < self.q < 1:
            raise ValueError("construction targets q<1 only")
        if self.d < 2:
            raise ValueError("construction needs d >= 2")

    @property
    def index(self) -> np.ndarray:
        return np.arange(1, self.N + 1, dtype=float)

    @property
    def log_heights(self) -> np.ndarray:
        return self.index * math.log(2.0)

    @property
    def log_radii(self) -> np.ndarray:
        i = self.index
        return -(np.log(i) / self.q + i * math.log(2.0)) / (self.d - 1)

    def heights(self) -> np.ndarray:
        return np.exp(self.log_heights)

    def radii(self) -> np.ndarray:
        return np.exp(self.log_radii)

    def partial_sums(self) -> np.ndarray:
        """``H_0, ..., H_N`` with ``H_i = 2^{i+1} - 2``."""
        return np.r_[0.0, 2.0 ** (np.arange(1, self.N + 1) + 1.0) - 2.0]

    @property
    def perimeter_constant(self) -> float:
        return sphere_area(self.d)

    def bv_norm(self) -> float:
        """``sum h_i |dB(0, r_i)|``; each term is ``omega_d i^{-1/q}`` up to rounding."""
        if self.N == 0:
            return 0.0
        terms = np.exp(self.log_heights + (self.d - 1) * self.log_radii)
        return float(self.perimeter_constant * np.sum(terms))

    def bv_series(self) -> float:
        """``omega_d sum_{i<=N} i^{-1/q}``, the closed form of :meth:`bv_norm`."""
        return float(self.perimeter_constant * np.sum(self.index ** (-1.0 / self.q)))

    def log_lorentz_q(self, p: float | None = None) -> float:
        """``log ||u_N||^q`` in ``L^{p, q}``, default ``p = d/(d-1)``; exact layer-cake sum."""
        if self.N == 0:
            return -math.inf
        p = p if p is not None else self.d / (self.d - 1)
        return radial_step_lorentz_log(self.log_heights, self.log_radii, self.d, LorentzParams(p, self.q))

    def lorentz_q(self, p: float | None = None) -> float:
        return math.exp(self.log_lorentz_q(p))

    def lorentz_norm(self, p: float | None = None) -> float:
        return math.exp(self.log_lorentz_q(p) / self.q)

    def sample(self, grid: GridSpec) -> SampledField:
        r = grid.radius()
        u = np.zeros(grid.shape)
        for h, rad in zip(self.heights(), self.radii()):
            u += h * (r < rad)
        return SampledField(grid, u)


def alvino_sequence(N: int, q: float, d: int = 2) -> RadialStepFunction:
    return RadialStepFunction(N, q, d)


def alvino_lower_bound(N: int, q: float, d: int) -> float:
    """``(d/(d-1)) omega_d^{q(d-1)/d} 2^{q-1} sum_{i<=N} 1/i`` with ``omega_d`` the sphere area."""
    H = float(np.sum(1.0 / np.arange(1, N + 1)))
    w = sphere_area(d)
    return d / (d - 1) * w ** (q * (d - 1) / d) * 2.0 ** (q - 1) * H


@dataclass(frozen=True, eq=False)
class AlvinoReport:
    q: float
    d: int
    N: list[int]
    norm_q: list[float]
    harmonic: list[float]
    lower_bound: list[float]
    bv: list[float]
    bv_series: list[float]
    ratio: list[float]
    fit: SlopeFit
    predicted_slope: float
    dominated: bool
    ratio_increasing: bool
    bv_limit: float

    @property
    def slope_relative_error(self) -> float:
        return abs(self.fit.slope - self.predicted_slope) / self.predicted_slope

    def to_json(self) -> dict:
        return {
            "q": self.q, "d": self.d, "N": self.N, "norm_q": self.norm_q, "harmonic": self.harmonic,
            "lower_bound": self.lower_bound, "bv": self.bv, "bv_series": self.bv_series, "ratio": self.ratio,
            "fit": self.fit.to_json(), "predicted_slope": self.predicted_slope,
            "slope_relative_error": self.slope_relative_error, "dominated": self.dominated,
            "ratio_increasing": self.ratio_increasing, "bv_limit": self.bv_limit,
        }


def alvino_divergence_check(q: float, d: int = 2, N_list=None) -> AlvinoReport:
    """Exact ``||u_N||^q`` against ``sum_{i<=N} 1/i`` and the displayed lower bound.

    ``bv_limit`` is ``omega_d zeta(1/q)``, the uniform bound on ``|Du_N|``.
    """
    N_list = list(N_list) if N_list is not None else [4 * 2**j for j in range(9)]
    rows = []
    for N in N_list:
        u = RadialStepFunction(N, q, d)
        nq = u.lorentz_q()
        bv = u.bv_norm()
        rows.append((N, nq, float(np.sum(1.0 / np.arange(1, N + 1))), alvino_lower_bound(N, q, d), bv, u.bv_series(),
                     u.lorentz_norm() / bv))
    N_, nq, harm, lb, bv, bvs, ratio = (list(c) for c in zip(*rows))
    fit = linear_fit(harm, nq)
    pred = d / (d - 1) * sphere_area(d) ** (q * (d - 1) / d) * 2.0 ** (q - 1)
    from scipy.special import zeta

    return AlvinoReport(
        q, d, N_, nq, harm, lb, bv, bvs, ratio, fit, pred,
        bool(all(a >= b for a, b in zip(nq, lb))),
        bool(all(b > a for a, b in zip(ratio[:-1], ratio[1:]))),
        float(sphere_area(d) * zeta(1.0 / q)),
    )


# ---------------------------------------------------------------------------
# balls, their Fourier transforms and heat-smoothed gradients

def ball_fourier_transform(R: float, d: int, rho: np.ndarray) -> np.ndarray:
    """``int_{|x|<R} exp(-2 pi i x.xi) dx = (R/rho)^{d/2} J_{d/2}(2 pi R rho)``; ``v_d R^d`` at 0."""
    rho = np.asarray(rho, dtype=float)
    out = np.full(rho.shape, ball_volume(d) * R**d)
    nz = rho > 0
    r = rho[nz]
    out[nz] = (R / r) ** (d / 2) * jv(d / 2, 2 * np.pi * R * r)
    return out


@dataclass(frozen=True)
class FinitePerimeterSet:
    """Finite union of disjoint balls ``B(c_j, R_j)``."""

    d: int
    balls: tuple[tuple[tuple[float, ...], float], ...]

    def __post_init__(self):
        if not self.balls:
            raise ValueError("a set needs at least one ball")
        for c, R in self.balls:
            if len(c) != self.d or not R > 0:
                raise ValueError("every ball needs a d-dimensional centre and positive radius")
        for i, (c1, R1) in enumerate(self.balls):
            for c2, R2 in self.balls[i + 1 :]:
                if np.linalg.norm(np.subtract(c1, c2)) < R1 + R2:
                    raise ValueError("balls must be disjoint for the exact perimeter")

    @classmethod
    def ball(cls, R: float = 1.0, d: int = 2) -> "FinitePerimeterSet":
        return cls(d, (((0.0,) * d, float(R)),))

    @property
    def volume(self) -> float:
        return float(sum(ball_volume(self.d) * R**self.d for _, R in self.balls))

    @property
    def perimeter(self) -> float:
        return float(sum(sphere_area(self.d) * R ** (self.d - 1) for _, R in self.balls))

    @property
    def extent(self) -> float:
        return float(max(np.linalg.norm(c) + R for c, R in self.balls))

    def isoperimetric_ratio(self) -> float:
        """``|E|^{1 - 1/d} / P(E)``; balls attain the largest value."""
        return self.volume ** (1 - 1 / self.d) / self.perimeter

    @staticmethod
    def ball_isoperimetric_constant(d: int) -> float:
        return ball_volume(d) ** (1 - 1 / d) / sphere_area(d)

    def indicator_hat(self, grid: GridSpec) -> np.ndarray:
        """Fourier coefficients of the periodised indicator, exact on the lattice."""
        xi = grid.frequencies()
        rho = grid.frequency_norm()
        out = np.zeros(grid.shape, dtype=complex)
        x0 = grid.axis()[0]
        for c, R in self.balls:
            # grid sample j sits at x0 + j h; the DFT phase is relative to x0
            phase = np.exp(-2j * np.pi * sum(k * (ci - x0) for k, ci in zip(xi, c)))
            out += ball_fourier_transform(R, self.d, rho) * phase
        return out

    def indicator(self, grid: GridSpec) -> SampledField:
        x = grid.coordinates()
        chi = np.zeros(grid.shape)
        for c, R in self.balls:
            chi += sum((xi - ci) ** 2 for xi, ci in zip(x, c)) < R**2
        return SampledField(grid, chi)

    def heat_gradient(self, grid: GridSpec, t: float = 0.0, eps: float | None = None) -> SampledField:
        """``p_t * D(phi_eps * chi_E)`` sampled on ``grid`` (Gaussian mollifier, ``eps`` default 2 cells)."""
        eps = 2 * grid.h if eps is None else eps
        xi = grid.frequencies(derivative=True)
        k2 = sum(k**2 for k in grid.frequencies())
        damp = np.exp(-4 * np.pi**2 * (t + eps**2 / 2) * k2)
        base = self.indicator_hat(grid) * damp
        comps = np.stack([2j * np.pi * k * base for k in xi])
        return inverse_transform(SpectralField(grid, comps))


def _set_grid(E: FinitePerimeterSet, t: float, n_cap: int) -> GridSpec:
    s = math.sqrt(t)
    L = 2 * (E.extent + 10 * s)
    n = 1 << max(5, math.ceil(math.log2(4 * L / s)))
    return GridSpec(E.d, L, min(n, n_cap))


@dataclass(frozen=True, eq=False)
class SetHeatReport:
    t: np.ndarray
    L1: np.ndarray
    Linf: np.ndarray
    lorentz: np.ndarray
    p: float
    alpha: float
    cells_per_root_t: np.ndarray
    eps_change: np.ndarray
    young_constant: float
    interp_constant: float
    bounds_L1: np.ndarray
    bounds_Linf: np.ndarray
    small_fit: SlopeFit
    large_fit: SlopeFit
    predicted_small: float
    predicted_large: float
    small_window: tuple[float, float]
    large_window: tuple[float, float]
    split_star: float
    split_totals: dict
    majorant: float
    perimeter: float
    L1_recovery: float
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "t": self.t.tolist(), "L1": self.L1.tolist(), "Linf": self.Linf.tolist(), "lorentz": self.lorentz.tolist(),
            "p": self.p, "alpha": self.alpha, "eps_change": self.eps_change.tolist(),
            "young_constant": self.young_constant, "interp_constant": self.interp_constant,
            "small_fit": self.small_fit.to_json(), "large_fit": self.large_fit.to_json(),
            "predicted_small": self.predicted_small, "predicted_large": self.predicted_large,
            "small_window": list(self.small_window), "large_window": list(self.large_window),
            "split_star": self.split_star, "split_totals": self.split_totals, "majorant": self.majorant,
            "perimeter": self.perimeter, "L1_recovery": self.L1_recovery, "notes": self.notes,
        }


def set_heat_estimates(
    E: FinitePerimeterSet,
    alpha: float = 1.0,
    small_window: tuple[float, float] = (1e-4, 1e-2),
    large_window: tuple[float, float] = (1e2, 1e4),
    nodes_per_decade: int = 4,
    n_cap: int = 2048,
) -> SetHeatReport:
    """Norms of ``p_t * D chi_E`` on log-spaced ``t`` covering both windows (units of ``R^2``).

    Every sample uses a box adapted to ``t`` and the exact lattice transform
    of ``chi_E``, mollified at two cells; the change when the mollifier is
    halved is recorded per ``t``.  The majorant
    ``int t^{alpha/2 - 1} ||p_t * D chi_E||_{L^{p,1}} dt`` (``p = d/(d - alpha)``)
    is split at ``r`` for a ladder around the balance point ``r*`` of the two
    interpolated bounds.
    """
    d = E.d
    p = d / (d - alpha)
    pp = p / (p - 1)
    R2 = E.extent**2
    lo, hi = small_window[0] * R2, large_window[1] * R2
    m = int(round(math.log10(hi / lo) * nodes_per_decade))
    t = np.geomspace(lo, hi, m + 1)
    L1, Linf, lor, cells, change = [], [], [], [], []
    params = LorentzParams(p, 1.0)
    for tj in t:
        g = _set_grid(E, tj, n_cap)
        cells.append(math.sqrt(tj) / g.h)
        if math.sqrt(tj) < 2 * g.h:
            raise ValueError(f"t={tj:.3g} unresolved at n={g.n}: sqrt(t)/h = {math.sqrt(tj) / g.h:.2f}")
        f = E.heat_gradient(g, tj)
        f_half = E.heat_gradient(g, tj, eps=g.h)
        L1.append(lp_norm(f, 1))
        Linf.append(lp_norm(f, np.inf))
        lor.append(lorentz_norm(distribution_profile(f), params))
        change.append(abs(lorentz_norm(distribution_profile(f_half), params) - lor[-1]) / lor[-1])
    L1, Linf, lor = np.array(L1), np.array(Linf), np.array(lor)

    # Young's inequality with the exact gradient-kernel constant sqrt(t) ||grad p_t||_1
    probe = GridSpec(d, 16.0, 256)
    cY = math.sqrt(1.0) * grad_heat_l1(1.0, probe)
    bounds_L1 = np.minimum(E.perimeter, cY * E.volume / np.sqrt(t))
    bounds_Linf = np.minimum((4 * np.pi * t) ** (-d / 2) * E.perimeter, cY / np.sqrt(t))
    # measured constant of ||f||_{p,1} <= C ||f||_1^{1/p} ||f||_inf^{1/p'}
    interp = float(np.max(lor / (L1 ** (1 / p) * Linf ** (1 / pp))))

    def fit(win):
        sel = (t >= win[0] * R2 * (1 - 1e-9)) & (t <= win[1] * R2 * (1 + 1e-9))
        return loglog_slope(t[sel], lor[sel])

    small, large = fit(small_window), fit(large_window)
    pred_small = -1 / (2 * pp)
    pred_large = -(1 / (2 * p) + d / (2 * pp))

    # bound-based interpolants: lower (small t) and upper (large t)
    A = E.perimeter ** (1 / p) * cY ** (1 / pp)  # times t^{-1/(2p')}
    B = (cY * E.volume) ** (1 / p) * ((4 * np.pi) ** (-d / 2) * E.perimeter) ** (1 / pp)  # times t^{pred_large}
    # balance point of A t^{-1/(2p')} and B t^{pred_large}
    r_star = (A / B) ** (1 / (pred_small - pred_large))

    g = t ** (alpha / 2) * lor
    u = np.log(t)
    e0 = small.slope + alpha / 2
    e1 = large.slope + alpha / 2
    if e0 <= 0 or e1 >= 0:
        raise ValueError(f"set majorant diverges: end exponents {e0:.3f} (t->0), {e1:.3f} (t->inf)")
    tail_lo, tail_hi = float(g[0] / e0), float(g[-1] / -e1)
    majorant = float(np.trapezoid(g, u) + tail_lo + tail_hi)

    def split_parts(r):
        ur = math.log(r)
        k = int(np.searchsorted(u, ur))
        gr = math.exp(np.interp(ur, u, np.log(g)))
        I = float(np.trapezoid(np.r_[g[:k], gr], np.r_[u[:k], ur]) + tail_lo)
        II = float(np.trapezoid(np.r_[gr, g[k:]], np.r_[ur, u[k:]]) + tail_hi)
        # the same split applied to the two interpolated bounds, integrated in closed form
        Ib = float(A * r ** (alpha / 2 + pred_small) / (alpha / 2 + pred_small))
        IIb = float(B * r ** (alpha / 2 + pred_large) / -(alpha / 2 + pred_large))
        return I, II, Ib, IIb

    ladder = [r_star * f for f in (0.25, 0.5, 1.0, 2.0, 4.0)]
    totals = {}
    for r in ladder:
        I, II, Ib, IIb = split_parts(r)
        totals[repr(float(r))] = {"I": I, "II": II, "total": I + II, "bound_I": Ib, "bound_II": IIb, "bound_total": Ib + IIb}
    return SetHeatReport(
        t, L1, Linf, lor, p, alpha, np.array(cells), np.array(change), cY, interp,
        bounds_L1, bounds_Linf, small, large, pred_small, pred_large, small_window, large_window,
        float(r_star), totals, majorant, E.perimeter, float(L1[0] / E.perimeter),
    )


# ---------------------------------------------------------------------------
# the fractional-gradient counterexample

def riesz_counterexample_norms(
    N_list=(1, 2, 3, 4), d: int = 2, alpha: float = 0.5, r: float = 0.5, n: int = 2048, L: float = 2.0,
    min_cells: float = 8.0,
) -> dict:
    """``||I_alpha Du_N||_{L^{d/(d-alpha), r}} / |Du_N|`` for ``q = r (d - alpha)/(d - 1)``.

    ``Du_N`` is built from the exact lattice transform of each ball (mollified
    at two cells) and the Riesz multiplier is applied spectrally.
    """
    q = r * (d - alpha) / (d - 1)
    grid = GridSpec(d, L, n)
    pL = d / (d - alpha)
    rows = []
    xi = grid.frequencies(derivative=True)
    rho = grid.frequency_norm()
    for N in N_list:
        u = RadialStepFunction(N, q, d)
        if N and u.radii()[-1] < min_cells * grid.h:
            feasible = max(i for i in range(1, N + 1) if RadialStepFunction(i, q, d).radii()[-1] >= min_cells * grid.h)
            raise ValueError(f"r_N spans fewer than {min_cells:g} cells at n={n}; largest feasible N is {feasible}")
        if u.radii().size and u.radii()[0] >= L / 2:
            raise ValueError("outermost ball does not fit in the box")
        hat = np.zeros(grid.shape)
        for hgt, rad in zip(u.heights(), u.radii()):
            hat += hgt * ball_fourier_transform(rad, d, rho)
        hat = hat * np.exp(-2 * np.pi**2 * (2 * grid.h) ** 2 * rho**2)
        with np.errstate(divide="ignore"):
            riesz = (2 * np.pi * rho) ** (-alpha)
        riesz[(0,) * d] = 0.0
        phase = np.exp(-2j * np.pi * sum(k * grid.axis()[0] for k in grid.frequencies()))
        comps = np.stack([2j * np.pi * k * riesz * hat * phase for k in xi])
        f = inverse_transform(SpectralField(grid, comps))
        lhs = lorentz_norm(distribution_profile(f), LorentzParams(pL, r))
        bv = u.bv_norm()
        rows.append({"N": N, "lorentz": lhs, "bv": bv, "ratio": lhs / bv, "r_N": float(u.radii()[-1]) if N else None})
    # N = 1 is the baseline; the trend is judged from N = 2 on
    ratios = [x["ratio"] for x in rows if x["N"] >= 2]
    return {
        "q": q, "r": r, "alpha": alpha, "d": d, "n": n, "L": L, "rows": rows,
        "increasing": bool(all(b > a for a, b in zip(ratios[:-1], ratios[1:]))),
        "note": "pointwise potential estimate and maximal-function chain not re-implemented; only the N-trend is observed",
    }
