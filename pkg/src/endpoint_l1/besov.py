"""Littlewood-Paley blocks, Besov-Lorentz norms and the heat majorants.

Blocks are ``f * (psi_{2^{n+1}} - psi_{2^n})`` with ``psi_r(x) = r^d psi(r x)``,
so block ``n`` has symbol ``psi^(xi / 2^{n+1}) - psi^(xi / 2^n)`` and lives on
the annulus ``2^{n-1} < |xi| < 2^{n+1}``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import j0, jv

from .grid import GridSpec, SampledField, apply_multiplier, lp_norm, magnitude
from .heat import QuadratureSpec, check_mean_zero, heat_convolve, heat_symbol, riesz_symbol
from .lorentz import LorentzParams, distribution_profile, lorentz_norm, sphere_area

__all__ = [
    "smooth_step",
    "psi_hat",
    "LittlewoodPaleySpec",
    "block_symbol",
    "lp_block",
    "BesovResult",
    "besov_norm",
    "m_hat",
    "multiplier_l1_norm",
    "verify_multiplier_identity",
    "MajorantResult",
    "continuous_majorant",
    "discrete_majorant",
    "duality_ratio",
    "field_lorentz_norm",
]


def smooth_step(s: np.ndarray) -> np.ndarray:
    """``g(s) / (g(s) + g(1 - s))`` with ``g(s) = exp(-1/s)`` for ``s > 0``."""
    s = np.asarray(s, dtype=float)

    def g(x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return out

    a, b = g(s), g(1.0 - s)
    return a / (a + b)


def psi_hat(rho: np.ndarray) -> np.ndarray:
    """Radial cutoff: 1 on ``|xi| <= 1/2``, 0 on ``|xi| >= 1``, smooth and monotone between."""
    return smooth_step(2.0 * (1.0 - np.asarray(rho, dtype=float)))


def field_lorentz_norm(f: SampledField, p: float, q: float | None = 1.0) -> float:
    """``L^{p,q}`` norm of a sampled field; ``q=None`` means plain ``L^p``."""
    if q is None:
        return lp_norm(f, p)
    return lorentz_norm(distribution_profile(f), LorentzParams(p, q))


@dataclass(frozen=True)
class LittlewoodPaleySpec:
    n_min: int
    n_max: int

    def __post_init__(self):
        if self.n_max < self.n_min:
            raise ValueError(f"empty block range [{self.n_min}, {self.n_max}]")

    @classmethod
    def default_for(cls, grid: GridSpec) -> "LittlewoodPaleySpec":
        """Blocks from the lowest lattice shell up to the last block inside the axis Nyquist band."""
        n_min = math.floor(math.log2(1.0 / grid.L))
        n_max = math.floor(math.log2(grid.n / (4.0 * grid.L)))
        return cls(n_min, max(n_max, n_min))

    @classmethod
    def covering(cls, grid: GridSpec) -> "LittlewoodPaleySpec":
        """Blocks whose sum is exactly 1 on every nonzero lattice frequency."""
        n_min = math.floor(math.log2(1.0 / grid.L))
        corner = math.sqrt(grid.d) * grid.n / (2.0 * grid.L)
        return cls(n_min, math.ceil(math.log2(corner)))

    @property
    def blocks(self) -> range:
        return range(self.n_min, self.n_max + 1)


def block_symbol(n: int):
    hi, lo = 2.0 ** (n + 1), 2.0**n
    return lambda *xi: psi_hat(np.sqrt(sum(k**2 for k in xi)) / hi) - psi_hat(
        np.sqrt(sum(k**2 for k in xi)) / lo
    )


def _block_representable(grid: GridSpec, n: int) -> bool:
    upper = 2.0 ** (n + 1)
    lower = 2.0 ** (n - 1)
    return lower < math.sqrt(grid.d) * grid.n / (2 * grid.L) and upper > 1.0 / grid.L


def lp_block(f: SampledField, n: int, spec: LittlewoodPaleySpec | None = None) -> SampledField:
    """Block ``n``; a block with no lattice frequency in its annulus is zero (with a warning)."""
    if not _block_representable(f.grid, n):
        warnings.warn(f"block {n} lies outside the grid's frequency band", RuntimeWarning, stacklevel=2)
        return SampledField.zeros(f.grid, f.m)
    return apply_multiplier(f, block_symbol(n))


@dataclass(frozen=True, eq=False)
class BesovResult:
    value: float
    s: float
    p: float
    q_outer: float
    lorentz_q: float | None
    spec: LittlewoodPaleySpec
    blocks: list[tuple[int, float, float, float]]
    tail: float

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "block_norm", "weight", "contribution"])
            for row in self.blocks:
                w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])
        return path


def _reconstruction_tail(f: SampledField, spec: LittlewoodPaleySpec) -> float:
    """Relative L2 size of the part of ``f`` not covered by the block range."""
    sym = lambda *xi: 1.0 - (
        psi_hat(np.sqrt(sum(k**2 for k in xi)) / 2.0 ** (spec.n_max + 1))
        - psi_hat(np.sqrt(sum(k**2 for k in xi)) / 2.0**spec.n_min)
    )
    rest = apply_multiplier(f, sym, zero_mode=0.0)
    base = np.linalg.norm(f.values - f.mean().reshape((-1,) + (1,) * f.grid.d))
    return float(np.linalg.norm(rest.values) / base) if base > 0 else 0.0


def _required_range(f: SampledField, rtol: float = 1e-12) -> tuple[int, int]:
    from .grid import spectral_transform

    amp = np.sqrt(np.sum(np.abs(spectral_transform(f).coeffs) ** 2, axis=0))
    amp[(0,) * f.grid.d] = 0.0
    rho = f.grid.frequency_norm()
    live = amp > rtol * amp.max()
    return math.floor(math.log2(rho[live].min())), math.ceil(math.log2(rho[live].max()))


def besov_norm(
    f: SampledField,
    s: float = 0.0,
    p: float = 2.0,
    q_outer: float = 1.0,
    lorentz_q: float | None = 1.0,
    spec: LittlewoodPaleySpec | None = None,
    tail_tol: float = 1e-6,
) -> BesovResult:
    """``(sum_n (2^{-s n} ||block_n f||_{L^{p, lorentz_q}})^{q_outer})^{1/q_outer}``.

    ``s`` is the decay exponent of the weights, so the smoothness index of the
    space is ``-s``.  ``lorentz_q=None`` uses plain ``L^p`` per block and
    ``q_outer=inf`` takes the supremum over blocks.
    """
    spec = spec or LittlewoodPaleySpec.default_for(f.grid)
    if not np.any(f.values):
        return BesovResult(0.0, s, p, q_outer, lorentz_q, spec, [], 0.0)
    tail = _reconstruction_tail(f, spec)
    if tail > tail_tol:
        lo, hi = _required_range(f)
        raise ValueError(
            f"block range [{spec.n_min}, {spec.n_max}] misses a relative L2 tail of {tail:.2e}; "
            f"the field's spectrum needs blocks [{lo - 1}, {hi}]"
        )
    rows = []
    for n in spec.blocks:
        blk = lp_block(f, n, spec)
        b = field_lorentz_norm(blk, p, lorentz_q)
        wgt = 2.0 ** (-s * n)
        rows.append((n, b, wgt, wgt * b))
    contrib = np.array([r[3] for r in rows])
    if np.isinf(q_outer):
        value = float(contrib.max())
    else:
        value = float(np.sum(contrib**q_outer) ** (1.0 / q_outer))
    return BesovResult(value, s, p, q_outer, lorentz_q, spec, rows, tail)


# ---------------------------------------------------------------------------
# the multiplier m linking Riesz blocks with heat-smoothed data

def m_hat(rho: np.ndarray, alpha: float) -> np.ndarray:
    """``(psi^(rho/2) - psi^(rho)) / ((2 pi rho)^alpha exp(-4 pi^2 rho^2))``, zero off ``(1/2, 2)``.

    The numerator is the block-0 symbol, so that
    ``block_n(I_alpha F) = 2^{-n alpha} p_{2^{-2n}} * F * m_{2^n}`` holds with a plus sign.
    """
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    on = (rho > 0.5) & (rho < 2.0)
    r = rho[on]
    out[on] = (psi_hat(r / 2) - psi_hat(r)) * np.exp(4 * np.pi**2 * r**2) * (2 * np.pi * r) ** (-alpha)
    return out


def _radial_inverse_ft(d: int):
    """Kernel ``K(rho, x)`` with ``f(x) = int F(rho) K(rho, x) drho`` for radial ``F`` in ``R^d``."""
    if d == 1:
        return lambda rho, x: 2 * np.cos(2 * np.pi * rho * x)
    if d == 2:
        return lambda rho, x: 2 * np.pi * rho * j0(2 * np.pi * rho * x)
    if d == 3:
        return lambda rho, x: 2 * rho * np.sinc(2 * rho * x) * 2 * np.pi * rho

    def kern(rho, x):
        x = np.maximum(x, 1e-300)
        return 2 * np.pi * x ** (1 - d / 2) * rho ** (d / 2) * jv(d / 2 - 1, 2 * np.pi * rho * x)

    return kern


def _bracketed_roots(f, lo: np.ndarray, hi: np.ndarray, xtol: float, max_iter: int = 200) -> np.ndarray:
    """Illinois regula falsi on all brackets at once; one batched ``f`` call per sweep.

    Brackets whose endpoint signs disagree on re-evaluation (round-off in the
    batched product) are dropped.
    """
    lo, hi = lo.astype(float).copy(), hi.astype(float).copy()
    flo, fhi = f(lo), f(hi)
    ok = flo * fhi < 0
    lo, hi, flo, fhi = lo[ok], hi[ok], flo[ok], fhi[ok]
    side = np.zeros(lo.size, dtype=int)
    for _ in range(max_iter):
        open_ = hi - lo > xtol + 8 * np.finfo(float).eps * np.abs(hi)
        if not open_.any():
            break
        mid = np.where(open_, (lo * fhi - hi * flo) / (fhi - flo), lo)
        # keep the secant point strictly inside the bracket
        mid = np.clip(mid, lo + 0.25 * xtol, hi - 0.25 * xtol)
        fm = f(mid)
        left = (fm * flo > 0) & open_
        right = (fm * flo <= 0) & open_
        # Illinois: halve the stale endpoint's value after two moves on one side
        fhi = np.where(left & (side == 1), fhi / 2, fhi)
        flo = np.where(right & (side == -1), flo / 2, flo)
        lo, flo = np.where(left, mid, lo), np.where(left, fm, flo)
        hi, fhi = np.where(right, mid, hi), np.where(right, fm, fhi)
        side = np.where(left, 1, np.where(right, -1, side))
        hit = (fm == 0) & open_
        lo, hi = np.where(hit, mid, lo), np.where(hit, mid, hi)
    return 0.5 * (lo + hi)


@lru_cache(maxsize=64)
def multiplier_l1_norm(alpha: float, d: int = 2, scale: float = 1.0, rho_nodes: int = 800) -> float:
    """``||m_r||_{L^1(R^d)}`` for ``m_r^(xi) = m^(xi / r)``.

    Radial inverse Fourier transform by Gauss-Legendre on the (trimmed)
    support of ``m_r^``, then ``int |m_r|`` between its sign changes.  The peak
    of ``m^`` is of order ``exp(130)`` for ``alpha ~ 1``; the computation is
    carried out on the normalised profile and rescaled at the end.
    """
    r = float(scale)
    probe = np.linspace(0.5 * r, 2.0 * r, 20001)[1:-1]
    vals = m_hat(probe / r, alpha)
    with np.errstate(divide="ignore"):
        logv = np.log(np.abs(vals))
    peak = float(np.max(logv))
    live = probe[logv > peak - math.log(1e18)]
    a, b = live[0] - (probe[1] - probe[0]), live[-1] + (probe[1] - probe[0])
    xg, wg = leggauss(rho_nodes)
    rho = 0.5 * (b - a) * xg + 0.5 * (a + b)
    w = 0.5 * (b - a) * wg
    kern = _radial_inverse_ft(d)
    amp = w * m_hat(rho / r, alpha) * math.exp(-peak)

    def f(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.size)
        for i in range(0, x.size, 256):
            xs = x[i : i + 256]
            out[i : i + 256] = kern(rho[:, None], xs[None, :]).T @ amp
        return out

    # sign changes are spaced by about 1 / (2 rho_peak); sample 16 per half-period
    rho_peak = probe[np.argmax(logv)]
    half = 1.0 / (2.0 * rho_peak)
    step = half / 16
    weight = lambda x: sphere_area(d) * x ** (d - 1)
    # extent: march outward until the weighted profile sits 1e-12 below its
    # peak; the quadrature noise floor is near 1e-16 of the peak
    chunk = 64 * half
    xs, fs = [np.array([0.0])], [f(np.array([0.0]))]
    top = abs(fs[0][0]) * max(weight(step), 1.0)
    x0 = 0.0
    quiet = 0
    while quiet < 2 and x0 < 4096 * half:
        seg = x0 + step * np.arange(1, int(round(chunk / step)) + 1)
        fv = f(seg)
        xs.append(seg)
        fs.append(fv)
        env = np.max(np.abs(fv) * weight(seg))
        top = max(top, env)
        quiet = quiet + 1 if env < 1e-12 * top else 0
        x0 = seg[-1]
    x = np.concatenate(xs)
    fx = np.concatenate(fs)
    flips = np.flatnonzero(np.sign(fx[1:]) * np.sign(fx[:-1]) < 0)
    # a root error e changes the integral by O(e^2)
    roots = _bracketed_roots(f, x[flips], x[flips + 1], 1e-10 * half)
    edges = np.r_[0.0, roots, x[-1]]
    gx, gw = leggauss(24)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        nodes = 0.5 * (hi - lo) * gx + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * float(np.sum(gw * np.abs(f(nodes)) * weight(nodes)))
    return total * math.exp(peak)


@dataclass(frozen=True, eq=False)
class MultiplierIdentityReport:
    n: int
    alpha: float
    discrepancy: float
    lhs_norm: float
    m_l1: float
    m_l1_scaled: float

    @property
    def dilation_ratio(self) -> float:
        return self.m_l1_scaled / self.m_l1


def verify_multiplier_identity(
    F: SampledField, alpha: float, n: int, spec: LittlewoodPaleySpec | None = None, check_dilation: bool = True
) -> MultiplierIdentityReport:
    """Compare ``block_n(I_alpha F)`` with ``2^{-n alpha} p_{2^{-2n}} * F * m_{2^n}``.

    Both sides are single spectral multipliers; chaining them through physical
    space would lose the ``exp(-4 pi^2 |xi|^2 / 4^n)`` factor to round-off.
    """
    grid = F.grid
    if not 0 < alpha < grid.d:
        raise ValueError(f"alpha must lie in (0, d), got {alpha}")
    check_mean_zero(F, "multiplier identity")
    if 2.0 ** (n + 1) > grid.n / (2 * grid.L):
        raise ValueError(f"scale n={n} is not resolved: block reaches |xi|={2.0 ** (n + 1)}, Nyquist is {grid.n / (2 * grid.L)}")
    riesz = riesz_symbol(alpha)
    blk = block_symbol(n)
    lhs = apply_multiplier(F, lambda *xi: blk(*xi) * riesz(*xi), zero_mode=0.0)
    r = 2.0**n
    heat = heat_symbol(2.0 ** (-2 * n))
    rhs = apply_multiplier(
        F,
        lambda *xi: 2.0 ** (-n * alpha) * heat(*xi) * m_hat(np.sqrt(sum(k**2 for k in xi)) / r, alpha),
        zero_mode=0.0,
    )
    ln = float(np.linalg.norm(lhs.values))
    diff = float(np.linalg.norm(lhs.values - rhs.values))
    disc = diff / ln if ln > 0 else diff
    m1 = multiplier_l1_norm(float(alpha), grid.d) if check_dilation else float("nan")
    mr = multiplier_l1_norm(float(alpha), grid.d, r) if check_dilation else float("nan")
    return MultiplierIdentityReport(n, alpha, disc, ln, m1, mr)


# ---------------------------------------------------------------------------
# heat majorants

@dataclass(frozen=True, eq=False)
class MajorantResult:
    value: float
    t: np.ndarray
    norms: np.ndarray
    integrand: np.ndarray
    lower_tail: float
    upper_tail: float
    notes: list[str] = field(default_factory=list)


def continuous_majorant(
    F: SampledField,
    alpha: float,
    p: float | None = None,
    quad: QuadratureSpec | None = None,
    end_tol: float = 1e-2,
) -> MajorantResult:
    """``int_0^inf t^{alpha/2 - 1} ||p_t * F||_{L^{p,1}} dt`` on the torus.

    Log-trapezoid over ``quad`` plus the closed-form piece
    ``(2/alpha) t_min^{alpha/2} ||F||`` below ``t_min``.  Raises when the
    log-measure integrand has not decayed to ``end_tol`` of its peak at either end.
    """
    grid = F.grid
    p = p if p is not None else grid.d / (grid.d - alpha)
    check_mean_zero(F, "heat majorant")
    quad = quad or QuadratureSpec.default_for(grid, nodes_per_decade=8)
    t, w = quad.nodes()
    norms = np.zeros(t.size)
    xi_min = 1.0 / grid.L
    for j, tj in enumerate(t):
        if math.exp(-4 * np.pi**2 * tj * xi_min**2) < 1e-30:
            break
        norms[j] = field_lorentz_norm(heat_convolve(F, tj), p, 1.0)
    g = t ** (alpha / 2) * norms
    peak = g.max()
    if peak == 0:
        return MajorantResult(0.0, t, norms, g, 0.0, 0.0)
    notes = []
    if g[0] > end_tol * peak:
        raise ValueError(
            f"majorant integrand has not decayed at t_min={t[0]:.3g} ({g[0] / peak:.2e} of peak); lower t_min"
        )
    if g[-1] > end_tol * peak:
        raise ValueError(
            f"majorant integrand has not decayed at t_max={t[-1]:.3g} ({g[-1] / peak:.2e} of peak); raise t_max"
        )
    lower = (2 / alpha) * quad.t_min ** (alpha / 2) * field_lorentz_norm(F, p, 1.0)
    upper = float(g[-1])
    value = float(np.sum(w * g)) + lower
    return MajorantResult(value, t, norms, g, lower, upper, notes)


@dataclass(frozen=True, eq=False)
class DiscreteMajorantResult:
    value: float
    terms: list[tuple[int, float, float, float]]


def discrete_majorant(
    F: SampledField, alpha: float, p: float | None = None, n_range: tuple[int, int] | None = None
) -> DiscreteMajorantResult:
    """``sum_n 2^{-n alpha} ||p_{2^{-2n}} * F||_{L^{p,1}}`` (without the ``||m||_1`` factor)."""
    grid = F.grid
    p = p if p is not None else grid.d / (grid.d - alpha)
    check_mean_zero(F, "heat majorant")
    if n_range is None:
        spec = LittlewoodPaleySpec.default_for(grid)
        n_range = (spec.n_min - 3, spec.n_max + 3)
    terms = []
    for n in range(n_range[0], n_range[1] + 1):
        tn = 2.0 ** (-2 * n)
        b = field_lorentz_norm(heat_convolve(F, tn), p, 1.0)
        terms.append((n, tn, b, 2.0 ** (-n * alpha) * b))
    return DiscreteMajorantResult(float(sum(x[3] for x in terms)), terms)


def discrete_to_continuous_constant(alpha: float) -> float:
    """``C`` in ``discrete <= C * continuous``: ``2^alpha / (2 ln 2)``, i.e. ``1/ln 2`` at ``alpha = 1``."""
    return 2.0**alpha / (2 * math.log(2))


# ---------------------------------------------------------------------------
# duality pairings

@dataclass(frozen=True, eq=False)
class DualityReport:
    mode: str
    pairing: float
    f_l1: float
    test_norm: float
    ratio: float
    constraint_residual: float


def duality_ratio(
    F: SampledField,
    phi: SampledField,
    mode: str = "gradient",
    alpha: float = 1.0,
    op=None,
    constraint_tol: float = 1e-9,
    spec: LittlewoodPaleySpec | None = None,
) -> DualityReport:
    """Ratio ``int F.phi / (||F||_1 * N(phi))``.

    ``mode="gradient"`` uses ``N(phi) = ||D phi||_{L^{d,inf}}``, ``mode="besov"``
    uses ``sup_n 2^{alpha n} ||block_n phi||_{L^{d/alpha}}``.  ``F`` must
    satisfy ``L(D) F = 0`` for ``op`` (divergence by default).
    """
    from .cocancel import FirstOrderOperator, constraint_residual

    grid = F.grid
    if phi.grid != grid or phi.m != F.m:
        raise ValueError("F and phi must share grid and component count")
    op = op or FirstOrderOperator.divergence(grid.d)
    res = constraint_residual(F, op)
    if res > constraint_tol:
        raise ValueError(f"F violates the differential constraint: relative residual {res:.2e}")
    pairing = float(np.sum(F.values * phi.values) * grid.cell_volume)
    f1 = lp_norm(F, 1)
    if mode == "gradient":
        comps = []
        for c in range(phi.m):
            for i in range(grid.d):
                comps.append(
                    apply_multiplier(phi.component(c), lambda *xi, i=i: 2j * np.pi * xi[i], derivative=True).values[0]
                )
        D = SampledField(grid, np.stack(comps))
        norm = field_lorentz_norm(D, grid.d, np.inf)
    elif mode == "besov":
        norm = besov_norm(phi, s=-alpha, p=grid.d / alpha, q_outer=np.inf, lorentz_q=None,
                          spec=spec or LittlewoodPaleySpec.covering(grid), tail_tol=np.inf).value
    else:
        raise ValueError(f"unknown duality mode {mode!r}")
    denom = f1 * norm
    if denom == 0 or abs(pairing) <= 1e-12 * max(1.0, lp_norm(F, 2) * lp_norm(phi, 2)):
        ratio = 0.0
    else:
        ratio = pairing / denom
    return DualityReport(mode, pairing, f1, norm, ratio, res)
