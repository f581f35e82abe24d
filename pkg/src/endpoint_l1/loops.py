"""Closed polygonal loops as vector measures and their heat convolutions.

``mu_Gamma`` pairs a vector field ``phi`` with ``int phi(gamma(s)) . gamma'(s) ds``.
Its heat convolution is evaluated segment by segment in closed form: along a
straight segment the Gaussian splits into a transverse factor and an erf
difference, so no quadrature or rasterisation is involved.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import erf, erfc

from .fitting import loglog_slope
from .grid import GridSpec, SampledField, lp_norm
from .lorentz import LorentzParams, distribution_profile, lorentz_norm

__all__ = [
    "Loop",
    "eval_heat_loop",
    "sample_heat_loop",
    "heat_loop_norms",
    "BallGrowthEstimate",
    "ball_growth_norm",
    "spanning_area",
    "LoopMajorantReport",
    "besov_majorant_loop",
    "loop_norm_table",
    "CLOSURE_TOL",
]

CLOSURE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Loop:
    """Closed polyline; ``vertices[0] == vertices[-1]``."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] not in (2, 3) or v.shape[0] < 3:
            raise ValueError("a loop needs at least two segments of points in R^2 or R^3")
        if np.max(np.abs(v[0] - v[-1])) > CLOSURE_TOL * max(1.0, np.max(np.abs(v))):
            raise ValueError("loop is not closed: first and last vertex differ")
        v[-1] = v[0]
        seg = np.diff(v, axis=0)
        lengths = np.linalg.norm(seg, axis=1)
        if np.any(lengths <= 0):
            raise ValueError("loop has a zero-length segment")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_lengths", lengths)
        object.__setattr__(self, "_tangents", seg / lengths[:, None])

    @property
    def d(self) -> int:
        return self.vertices.shape[1]

    @property
    def starts(self) -> np.ndarray:
        return self.vertices[:-1]

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    @property
    def tangents(self) -> np.ndarray:
        return self._tangents

    @property
    def length(self) -> float:
        return float(np.sum(self._lengths))

    @property
    def centroid(self) -> np.ndarray:
        mids = self.starts + 0.5 * self._lengths[:, None] * self._tangents
        return (self._lengths @ mids) / self.length

    @property
    def radius(self) -> float:
        """Largest distance from the centroid to a vertex."""
        return float(np.max(np.linalg.norm(self.vertices - self.centroid, axis=1)))

    def scaled(self, lam: float) -> "Loop":
        return Loop(lam * self.vertices)

    def reversed(self) -> "Loop":
        return Loop(self.vertices[::-1])

    @classmethod
    def closed(cls, points) -> "Loop":
        pts = np.asarray(points, dtype=float)
        return cls(np.vstack([pts, pts[:1]]))

    @classmethod
    def circle(cls, radius: float = 1.0, segments: int = 256, center=(0.0, 0.0)) -> "Loop":
        """Regular polygon with circumradius ``radius``, counter-clockwise."""
        th = 2 * np.pi * np.arange(segments) / segments
        c = np.asarray(center, dtype=float)
        return cls.closed(c + radius * np.stack([np.cos(th), np.sin(th)], axis=1))

    @classmethod
    def rectangle(cls, width: float, height: float, center=(0.0, 0.0)) -> "Loop":
        w, h = width / 2, height / 2
        c = np.asarray(center, dtype=float)
        return cls.closed(c + np.array([[-w, -h], [w, -h], [w, h], [-w, h]]))

    @classmethod
    def figure_eight(cls, radius: float = 1.0, segments_per_lobe: int = 256) -> "Loop":
        """Two circles touching at the origin; the right lobe runs counter-clockwise, the left clockwise."""
        th = 2 * np.pi * np.arange(segments_per_lobe) / segments_per_lobe
        right = np.stack([radius * (1 - np.cos(th)), -radius * np.sin(th)], axis=1)
        left = np.stack([-radius * (1 - np.cos(th)), -radius * np.sin(th)], axis=1)
        return cls.closed(np.vstack([right, left]))

    @classmethod
    def figure_eight_lobes(cls, radius: float = 1.0, segments_per_lobe: int = 256) -> tuple["Loop", "Loop"]:
        """The two lobes of :meth:`figure_eight` as separate closed loops."""
        v = cls.figure_eight(radius, segments_per_lobe).vertices
        k = segments_per_lobe
        return Loop(v[: k + 1]), Loop(v[k:])

    def to_json(self) -> dict:
        return {"d": self.d, "vertices": self.vertices.tolist()}

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json()))
        return path

    @classmethod
    def from_json(cls, data: dict) -> "Loop":
        v = np.asarray(data["vertices"], dtype=float)
        if v.ndim != 2 or v.shape[1] != int(data["d"]):
            raise ValueError(f"vertices do not match the declared dimension {data['d']}")
        return cls(v)

    @classmethod
    def load(cls, path: str | Path) -> "Loop":
        return cls.from_json(json.loads(Path(path).read_text()))


def _erf_diff(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``erf(b) - erf(c)`` for ``b >= c``, via erfc where both arguments share a sign."""
    out = erf(b) - erf(c)
    pos = c > 0
    out[pos] = erfc(c[pos]) - erfc(b[pos])
    neg = b < 0
    out[neg] = erfc(-b[neg]) - erfc(-c[neg])
    return out


def _accumulate(loop: Loop, t: float, pts: np.ndarray, pad: float | None) -> np.ndarray:
    d = loop.d
    out = np.zeros_like(pts)
    s = math.sqrt(t)
    pref = (4 * np.pi * t) ** (-d / 2) * math.sqrt(np.pi * t)
    for A, u, ell in zip(loop.starts, loop.tangents, loop.lengths):
        if pad is None:
            idx = slice(None)
            y = pts - A
        else:
            lo = np.minimum(A, A + ell * u) - pad
            hi = np.maximum(A, A + ell * u) + pad
            idx = np.flatnonzero(np.all((pts >= lo) & (pts <= hi), axis=1))
            if idx.size == 0:
                continue
            y = pts[idx] - A
        a = y @ u
        perp2 = np.sum((y - a[:, None] * u) ** 2, axis=1)
        val = pref * np.exp(-perp2 / (4 * t)) * _erf_diff((ell - a) / (2 * s), -a / (2 * s))
        out[idx] += val[:, None] * u
    return out


def _accumulate_grid(loop: Loop, t: float, axes: list[np.ndarray], pad: float) -> np.ndarray:
    """Tensor-grid version of :func:`_accumulate`: each segment touches only its padded index box."""
    d = loop.d
    out = np.zeros((d,) + tuple(a.size for a in axes))
    s = math.sqrt(t)
    pref = (4 * np.pi * t) ** (-d / 2) * math.sqrt(np.pi * t)
    for A, u, ell in zip(loop.starts, loop.tangents, loop.lengths):
        lo = np.minimum(A, A + ell * u) - pad
        hi = np.maximum(A, A + ell * u) + pad
        win = [slice(int(np.searchsorted(a, l)), int(np.searchsorted(a, h, side="right"))) for a, l, h in zip(axes, lo, hi)]
        if any(w.stop <= w.start for w in win):
            continue
        y = np.meshgrid(*[a[w] - A[i] for i, (a, w) in enumerate(zip(axes, win))], indexing="ij", sparse=True)
        a = sum(u[i] * y[i] for i in range(d))
        perp2 = sum((y[i] - a * u[i]) ** 2 for i in range(d))
        val = pref * np.exp(-perp2 / (4 * t)) * _erf_diff((ell - a) / (2 * s), -a / (2 * s))
        for i in range(d):
            out[(i, *win)] += u[i] * val
    return out


def eval_heat_loop(loop: Loop, t: float, x) -> np.ndarray:
    """``(p_t * mu_Gamma)(x)`` for points ``x`` of shape ``(..., d)``."""
    if not t > 0:
        raise ValueError(f"heat time must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != loop.d:
        raise ValueError(f"points must have {loop.d} coordinates")
    flat = x.reshape(-1, loop.d)
    return _accumulate(loop, t, flat, None).reshape(x.shape)


def adaptive_grid(loop: Loop, t: float, n_cap: int | None = None, cells_per_root_t: float = 4.0) -> GridSpec:
    """Box of side ``2 (R + 10 sqrt t)`` around the centroid, ``h <= sqrt(t) / 4`` if the cap allows."""
    n_cap = n_cap or (512 if loop.d == 2 else 96)
    s = math.sqrt(t)
    L = 2 * (loop.radius + 10 * s)
    need = L * cells_per_root_t / s
    n = 1 << max(4, math.ceil(math.log2(need)))
    # n_cap may not be a power of two in 3-d; round it down
    cap = 1 << int(math.floor(math.log2(n_cap)))
    return GridSpec(loop.d, L, min(n, cap))


@dataclass(frozen=True, eq=False)
class LoopSample:
    field: SampledField
    offset: np.ndarray
    extra_max: float


def sample_heat_loop(
    loop: Loop, t: float, grid: GridSpec | None = None, n_cap: int | None = None, near_curve: bool = False
) -> LoopSample:
    """Grid samples of ``p_t * mu_Gamma`` centred on the loop.

    With ``near_curve`` set, ``extra_max`` is the largest magnitude over points
    laid across the curve (normal offsets up to ``2 sqrt t``), which the grid
    alone can miss; otherwise it is 0.
    """
    if not t > 0:
        raise ValueError(f"heat time must be positive, got {t}")
    grid = grid or adaptive_grid(loop, t, n_cap)
    s = math.sqrt(t)
    if s < 2 * grid.h:
        raise ValueError(f"t={t:.3g} unresolved: sqrt(t)={s:.3g} is below two cells (h={grid.h:.3g})")
    center = loop.centroid
    lo = loop.vertices.min(axis=0) - center
    hi = loop.vertices.max(axis=0) - center
    if np.any(lo - 6 * s < -grid.L / 2) or np.any(hi + 6 * s > grid.L / 2 - grid.h):
        raise ValueError("grid box does not contain the 6 sqrt(t) neighbourhood of the loop")
    axes = [grid.axis() + c for c in center]
    f = SampledField(grid, _accumulate_grid(loop, t, axes, 10 * s))
    return LoopSample(f, center, _max_near_curve(loop, t) if near_curve else 0.0)


def _max_near_curve(loop: Loop, t: float, per_segment: int = 3, offsets: int = 41) -> float:
    s = math.sqrt(t)
    frac = (np.arange(per_segment) + 0.5) / per_segment
    base = (loop.starts[:, None, :] + (frac[None, :, None] * loop.lengths[:, None, None]) * loop.tangents[:, None, :]).reshape(-1, loop.d)
    if loop.d == 2:
        nrm = np.stack([-loop.tangents[:, 1], loop.tangents[:, 0]], axis=1)
        nrm = np.repeat(nrm, per_segment, axis=0)
        delta = np.linspace(-2 * s, 2 * s, offsets)
        pts = (base[:, None, :] + delta[None, :, None] * nrm[:, None, :]).reshape(-1, 2)
    else:
        pts = base
    pts = np.vstack([pts, loop.vertices[:-1]])
    vals = _accumulate(loop, t, pts, 10 * s)
    return float(np.max(np.linalg.norm(vals, axis=1)))


def heat_loop_norms(
    loop: Loop, t: float, p: float, q: float | None = None, grid: GridSpec | None = None, n_cap: int | None = None
) -> float:
    """``||p_t * mu_Gamma||`` in ``L^p`` (``q=None``) or ``L^{p,q}``; ``p=inf`` is the sup."""
    smp = sample_heat_loop(loop, t, grid, n_cap, near_curve=bool(np.isinf(p)))
    if np.isinf(p):
        return max(lp_norm(smp.field, np.inf), smp.extra_max)
    if q is None:
        return lp_norm(smp.field, p)
    return lorentz_norm(distribution_profile(smp.field), LorentzParams(p, q))


# ---------------------------------------------------------------------------
# ball growth

@dataclass(frozen=True)
class BallGrowthEstimate:
    """Sampled lower bound for ``sup_{x, r} |mu_Gamma|(B(x, r)) / r`` (open balls)."""

    value: float
    center: tuple[float, ...]
    radius: float
    resolution: dict


def _ball_mass(loop: Loop, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Arc length inside open balls; ``centers`` (C, d), ``radii`` (C, R) -> (C, R)."""
    mass = np.zeros(radii.shape)
    r2 = radii**2
    for A, u, ell in zip(loop.starts, loop.tangents, loop.lengths):
        y = centers - A
        a = y @ u
        perp2 = np.sum((y - a[:, None] * u) ** 2, axis=1)
        half = np.sqrt(np.maximum(r2 - perp2[:, None], 0.0))
        lo = np.clip(a[:, None] - half, 0.0, ell)
        hi = np.clip(a[:, None] + half, 0.0, ell)
        mass += hi - lo
    return mass


def ball_growth_norm(
    loop: Loop,
    curve_samples: int = 4,
    grid_points: int = 41,
    log_radii: int = 64,
    nudge: float = 1e-9,
) -> BallGrowthEstimate:
    """Brute-force ball-growth value.

    Centres: vertices, points along each segment, and a uniform grid over the
    bounding box.  Radii: every centre-vertex distance nudged up by ``nudge``
    (relative), plus a log-spaced ladder from a hundredth of the shortest
    segment to the loop diameter.  Every candidate is an honest ball, so the
    result never exceeds the true supremum.
    """
    v = loop.vertices[:-1]
    frac = np.arange(1, curve_samples + 1) / (curve_samples + 1)
    on_curve = (v[:, None, :] + (frac[None, :, None] * loop.lengths[:, None, None]) * loop.tangents[:, None, :]).reshape(-1, loop.d)
    lo, hi = loop.vertices.min(axis=0), loop.vertices.max(axis=0)
    axes = [np.linspace(a, b, grid_points) for a, b in zip(lo, hi)]
    box = np.stack([c.ravel() for c in np.meshgrid(*axes, indexing="ij")], axis=1)
    centers = np.vstack([v, on_curve, box])
    diam = float(np.max(np.linalg.norm(v[:, None] - v[None], axis=2)))
    ladder = np.geomspace(loop.lengths.min() / 100, 1.01 * diam, log_radii)
    best = (-1.0, None, None)
    for i in range(0, centers.shape[0], 128):
        c = centers[i : i + 128]
        dist = np.linalg.norm(c[:, None, :] - v[None, :, :], axis=2) * (1 + nudge)
        radii = np.concatenate([dist, np.broadcast_to(ladder, (c.shape[0], ladder.size))], axis=1)
        mass = _ball_mass(loop, c, radii)
        ratio = np.divide(mass, radii, out=np.zeros_like(mass), where=radii > 0)
        j = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[j] > best[0]:
            best = (float(ratio[j]), tuple(float(x) for x in c[j[0]]), float(radii[j]))
    res = {"curve_samples": curve_samples, "grid_points": grid_points, "log_radii": log_radii, "centers": int(centers.shape[0])}
    return BallGrowthEstimate(best[0], best[1], best[2], res)


# ---------------------------------------------------------------------------
# spanning area

def _segments_cross(p: np.ndarray, q: np.ndarray, eps: float) -> np.ndarray:
    """Pairwise closed-segment intersection test for 2-d segments ``p[i] -> q[i]``."""
    d = q - p
    cross = lambda a, b: a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    o1 = cross(d[:, None], p[None] - p[:, None])
    o2 = cross(d[:, None], q[None] - p[:, None])
    o3 = cross(d[None], p[:, None] - p[None])
    o4 = cross(d[None], q[:, None] - p[None])
    return (o1 * o2 <= eps) & (o3 * o4 <= eps)


def spanning_area(loop: Loop, tol: float = 1e-9) -> float:
    """Area enclosed by a planar simple polygon (shoelace in its own plane).

    All-collinear loops span zero area.
    """
    v = loop.vertices[:-1]
    scale = max(loop.radius, np.finfo(float).tiny)
    c = v - v.mean(axis=0)
    _, sv, vt = np.linalg.svd(c, full_matrices=False)
    if sv.size > 1 and sv[1] <= tol * scale * math.sqrt(v.shape[0]):
        return 0.0
    if loop.d == 3 and sv[2] > tol * scale * math.sqrt(v.shape[0]):
        raise ValueError("spanning surface computation restricted to planar simple loops: loop is not planar")
    xy = c @ vt[:2].T if loop.d == 3 else c
    p, q = xy, np.roll(xy, -1, axis=0)
    hit = _segments_cross(p, q, (tol * scale) ** 2)
    n = p.shape[0]
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    if np.any(hit[i[keep], j[keep]]):
        raise ValueError("spanning surface computation restricted to planar simple loops: loop self-intersects")
    return float(abs(0.5 * np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1])))


# ---------------------------------------------------------------------------
# the Besov-Lorentz majorant of a loop

@dataclass(frozen=True, eq=False)
class LoopMajorantReport:
    value: float
    split_t: float
    small_part: float
    large_part: float
    lower_tail: float
    upper_tail: float
    t: np.ndarray
    norms: np.ndarray
    small_slope: float
    large_slope: float
    predicted_small_slope: float
    predicted_large_slope: float
    naive_slopes: tuple[float, float]
    notes: list[str] = field(default_factory=list)

    def rows(self):
        a = self.t
        return [(float(x), float(y)) for x, y in zip(a, self.norms)]


def besov_majorant_loop(
    loop: Loop,
    alpha: float = 1.0,
    t_range: tuple[float, float] | None = None,
    nodes_per_decade: int = 4,
    small_window: tuple[float, float] = (1e-4, 1e-2),
    large_window: tuple[float, float] = (1e2, 1e4),
    n_cap: int | None = None,
) -> LoopMajorantReport:
    """``int_0^inf t^{alpha/2 - 1} ||p_t * mu_Gamma||_{L^{d/(d-alpha), 1}} dt`` split at ``|Gamma|^2``.

    Nodes are log-spaced over ``t_range`` (default ``R^2 [1e-4, 1e4]`` with
    ``R`` the loop radius).  Beyond the node range the integrand is continued
    as the power law fitted on the two end windows (given in units of
    ``R^2``); a non-decaying end raises.  Slopes reported are those of the
    norm itself, to be compared with ``-alpha (d-1)/(2d)`` and
    ``-alpha/2 - (d-alpha)/(2d)``.
    """
    d = loop.d
    if not 0 < alpha < d:
        raise ValueError(f"alpha must lie in (0, d), got {alpha}")
    p = d / (d - alpha)
    R2 = loop.radius**2
    t_lo, t_hi = t_range or (small_window[0] * R2, large_window[1] * R2)
    m = int(round(math.log10(t_hi / t_lo) * nodes_per_decade))
    u = np.linspace(math.log(t_lo), math.log(t_hi), m + 1)
    t = np.exp(u)
    norms = np.array([heat_loop_norms(loop, tj, p, 1.0, n_cap=n_cap) for tj in t])
    g = t ** (alpha / 2) * norms

    def window_slope(lo, hi):
        sel = (t >= lo * R2 * (1 - 1e-9)) & (t <= hi * R2 * (1 + 1e-9))
        if sel.sum() < 2:
            raise ValueError(f"fewer than two nodes in the slope window {lo}..{hi} R^2")
        return loglog_slope(t[sel], norms[sel]).slope

    s_small = window_slope(*small_window)
    s_large = window_slope(*large_window)
    e_small = s_small + alpha / 2  # exponent of the log-measure integrand at 0
    e_large = s_large + alpha / 2
    if e_small <= 0:
        raise ValueError(f"majorant diverges at t -> 0: integrand exponent {e_small:.3f} in d(log t)")
    if e_large >= 0:
        raise ValueError(f"majorant diverges at t -> inf: integrand exponent {e_large:.3f} in d(log t)")
    lower = g[0] / e_small
    upper = g[-1] / -e_large
    split = loop.length**2
    # trapezoid in log t, cut exactly at the split point by linear interpolation of log g
    us = math.log(split)
    if not u[0] < us < u[-1]:
        raise ValueError("node range must contain the split point |Gamma|^2")
    k = int(np.searchsorted(u, us))
    gs = math.exp(np.interp(us, u, np.log(g)))
    left_u, left_g = np.r_[u[:k], us], np.r_[g[:k], gs]
    right_u, right_g = np.r_[us, u[k:]], np.r_[gs, g[k:]]
    small = float(np.trapezoid(left_g, left_u)) + lower
    large = float(np.trapezoid(right_g, right_u)) + upper
    pred_small = -alpha * (d - 1) / (2 * d)
    pred_large = -alpha / 2 - (d - alpha) / (2 * d)
    # with only |Gamma| t^{-alpha/2} available the t-integrand is t^{-1} on both sides
    naive = (-1.0, -1.0)
    return LoopMajorantReport(
        small + large, split, small, large, float(lower), float(upper), t, norms,
        s_small, s_large, pred_small, pred_large, naive,
    )


def loop_norm_table(loop: Loop, t_values, alpha: float = 1.0, n_cap: int | None = None) -> list[dict]:
    """Per-t norms with the classical and refined bound predictors."""
    d = loop.d
    p = d / (d - alpha)
    bg = ball_growth_norm(loop).value
    rows = []
    for t in t_values:
        smp = sample_heat_loop(loop, t, n_cap=n_cap, near_curve=True)
        l1 = lp_norm(smp.field, 1)
        linf = max(lp_norm(smp.field, np.inf), smp.extra_max)
        lor = lorentz_norm(distribution_profile(smp.field), LorentzParams(p, 1.0))
        rows.append({
            "t": t,
            "L1": l1,
            "Linf": linf,
            "Lorentz": lor,
            "bound_L1_classical": loop.length,
            "bound_Linf_classical": (4 * np.pi * t) ** (-d / 2) * loop.length,
            "bound_L1_area_shape": loop.length**2 / math.sqrt(t),
            "bound_Linf_growth_shape": t ** (-(d - 1) / 2) * bg,
        })
    return rows


def write_table(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) for k, v in r.items()})
    return path
