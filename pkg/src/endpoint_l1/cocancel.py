"""Constant-coefficient first-order operators ``L(D) F = sum_i L_i d_i F``.

``L(D)`` is cocancelling when the symbols ``L(xi)`` share no kernel vector.
Equivalently the stacked map ``T F = (L_1 F | ... | L_d F)`` is injective,
which is read off a singular value decomposition of ``T``.  Since
``L(D) F = div(T F)`` row by row, an ``L(D)``-free field is turned into a
divergence-free matrix field and recovered through ``T^+ = (T^T T)^{-1} T^T``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .grid import GridSpec, SampledField, SpectralField, inverse_transform, spectral_transform

__all__ = [
    "FirstOrderOperator",
    "symbol",
    "t_matrix",
    "CocancelReport",
    "is_cocancelling",
    "TMatrix",
    "pseudo_inverse",
    "apply_operator",
    "constraint_residual",
    "manufactured_free_field",
    "ReductionReport",
    "reduce_to_div",
    "common_kernel_sampled",
    "subspace_distance",
    "dirac_mass_experiment",
    "RANK_RTOL",
]

RANK_RTOL = 1e-10


def _forms(d: int, k: int) -> list[tuple[int, ...]]:
    return list(combinations(range(d), k))


@dataclass(frozen=True, eq=False)
class FirstOrderOperator:
    """Coefficients ``L`` of shape ``(d, l, k)``: ``L[i]`` multiplies ``d_i F``."""

    L: np.ndarray
    name: str = ""

    def __post_init__(self):
        L = np.array(self.L, dtype=float)
        if L.ndim != 3 or L.shape[0] < 1 or L.shape[1] < 1 or L.shape[2] < 1:
            raise ValueError("coefficients must have shape (d, l, k) with positive sizes")
        if not np.any(L):
            raise ValueError("at least one coefficient matrix must be nonzero")
        L.flags.writeable = False
        object.__setattr__(self, "L", L)

    @property
    def d(self) -> int:
        return self.L.shape[0]

    @property
    def l(self) -> int:
        return self.L.shape[1]

    @property
    def k(self) -> int:
        return self.L.shape[2]

    @classmethod
    def divergence(cls, d: int) -> "FirstOrderOperator":
        return cls(np.eye(d)[:, None, :], "div")

    @classmethod
    def gradient(cls, d: int) -> "FirstOrderOperator":
        return cls(np.eye(d)[:, :, None], "grad")

    @classmethod
    def exterior_derivative(cls, d: int, k: int) -> "FirstOrderOperator":
        """``d`` from ``k``-forms to ``(k+1)``-forms, components in lexicographic order."""
        if not 0 <= k < d:
            raise ValueError(f"exterior derivative on {k}-forms in R^{d} has no output components")
        src, dst = _forms(d, k), _forms(d, k + 1)
        pos = {I: j for j, I in enumerate(src)}
        L = np.zeros((d, len(dst), len(src)))
        for r, J in enumerate(dst):
            for p, i in enumerate(J):
                L[i, r, pos[J[:p] + J[p + 1 :]]] += (-1) ** p
        return cls(L, f"d[{k}]")

    @classmethod
    def codifferential(cls, d: int, k: int) -> "FirstOrderOperator":
        """Formal adjoint ``d*`` from ``k``-forms to ``(k-1)``-forms."""
        if not 0 < k <= d:
            raise ValueError(f"codifferential on {k}-forms in R^{d} has no output components")
        ext = cls.exterior_derivative(d, k - 1)
        # d* is -sum_i (L_i)^T d_i when d = sum_i L_i d_i
        return cls(-np.transpose(ext.L, (0, 2, 1)), f"d*[{k}]")

    def to_json(self) -> dict:
        return {"d": self.d, "k": self.k, "l": self.l, "L": self.L.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "FirstOrderOperator":
        L = np.asarray(data["L"], dtype=float)
        want = (int(data["d"]), int(data["l"]), int(data["k"]))
        if L.shape != want:
            raise ValueError(f"coefficient array has shape {L.shape}, header says {want}")
        return cls(L, data.get("name", ""))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json()))
        return path

    @classmethod
    def load(cls, path: str | Path) -> "FirstOrderOperator":
        return cls.from_json(json.loads(Path(path).read_text()))


def symbol(op: FirstOrderOperator, xi) -> np.ndarray:
    """``L(xi) = sum_i xi_i L_i`` as an ``l x k`` matrix."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (op.d,):
        raise ValueError(f"frequency must have {op.d} components, got shape {xi.shape}")
    return np.tensordot(xi, op.L, axes=1)


def t_matrix(op: FirstOrderOperator) -> np.ndarray:
    """``(l d) x k`` matrix with row ``a d + i`` equal to row ``a`` of ``L_i``."""
    return np.transpose(op.L, (1, 0, 2)).reshape(op.l * op.d, op.k)


@dataclass(frozen=True, eq=False)
class CocancelReport:
    cocancelling: bool
    rank: int
    singular_values: np.ndarray
    kernel_basis: np.ndarray
    threshold: float
    conditioning: float

    def __bool__(self) -> bool:
        return self.cocancelling

    def to_json(self) -> dict:
        return {
            "cocancelling": self.cocancelling,
            "rank": self.rank,
            "kernel_basis": self.kernel_basis.T.tolist(),
            "conditioning": self.conditioning,
            "singular_values": self.singular_values.tolist(),
            "rank_threshold": self.threshold,
        }


def is_cocancelling(op: FirstOrderOperator, rtol: float = RANK_RTOL) -> CocancelReport:
    """Rank test on ``T``: singular values below ``rtol * sigma_max`` count as zero.

    ``kernel_basis`` has orthonormal columns spanning ``ker T``.
    """
    T = t_matrix(op)
    _, sv, vt = np.linalg.svd(T, full_matrices=True)
    thr = rtol * sv[0]
    rank = int(np.sum(sv > thr))
    kernel = vt[rank:].T
    cond = float(sv[0] / sv[op.k - 1]) if rank == op.k else math.inf
    return CocancelReport(rank == op.k, rank, sv, kernel, float(thr), cond)


@dataclass(frozen=True, eq=False)
class TMatrix:
    T: np.ndarray
    rank: int
    pinv: np.ndarray
    norm: float
    pinv_norm: float


def pseudo_inverse(op: FirstOrderOperator, rtol: float = RANK_RTOL, warn_cond: float = 1e6) -> TMatrix:
    """Left inverse ``(T^T T)^{-1} T^T``; warns when ``cond(T)`` exceeds ``warn_cond``."""
    rep = is_cocancelling(op, rtol)
    if not rep:
        raise ValueError(f"T not injective: rank {rep.rank} < k = {op.k}")
    if rep.conditioning > warn_cond:
        warnings.warn(f"T is ill conditioned (cond = {rep.conditioning:.3g})", RuntimeWarning, stacklevel=2)
    T = t_matrix(op)
    P = np.linalg.solve(T.T @ T, T.T)
    return TMatrix(T, rep.rank, P, float(np.linalg.norm(T, 2)), float(np.linalg.norm(P, 2)))


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Spectral-norm distance between orthogonal projectors onto the column spans."""
    def proj(M):
        if M.shape[1] == 0:
            return np.zeros((M.shape[0], M.shape[0]))
        q, _ = np.linalg.qr(M)
        return q @ q.T

    return float(np.linalg.norm(proj(A) - proj(B), 2))


def common_kernel_sampled(op: FirstOrderOperator, samples: int = 32, seed: int = 0, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the intersection of ``ker L(xi)`` over random unit ``xi``."""
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((samples, op.d))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    stacked = np.concatenate([symbol(op, x) for x in xi], axis=0)
    _, sv, vt = np.linalg.svd(stacked, full_matrices=True)
    rank = int(np.sum(sv > rtol * sv[0]))
    return vt[rank:].T


# ---------------------------------------------------------------------------
# fields

def apply_operator(F: SampledField, op: FirstOrderOperator) -> SampledField:
    """``L(D) F`` spectrally, with derivatives on the Nyquist-free lattice."""
    if F.m != op.k or F.grid.d != op.d:
        raise ValueError(f"operator expects {op.k} components in {op.d} dimensions")
    grid = F.grid
    xi = grid.frequencies(derivative=True)
    Fh = spectral_transform(F).coeffs
    out = np.zeros((op.l,) + grid.shape, dtype=complex)
    for i in range(op.d):
        out += 2j * np.pi * xi[i] * np.tensordot(op.L[i], Fh, axes=1)
    return inverse_transform(SpectralField(grid, out))


def _gradient_l2(F: SampledField) -> float:
    grid = F.grid
    xi = grid.frequencies(derivative=True)
    k2 = sum(x**2 for x in xi)
    Fh = spectral_transform(F).coeffs
    # Parseval on the torus: ||g||_2^2 = sum |g^|^2 / L^d
    return float(math.sqrt(np.sum(4 * np.pi**2 * k2 * np.abs(Fh) ** 2) / grid.L**grid.d))


def constraint_residual(F: SampledField, op: FirstOrderOperator) -> float:
    """``||L(D) F||_2 / (||T||_2 ||D F||_2)``, zero for fields without gradient."""
    g = _gradient_l2(F)
    if g == 0:
        return 0.0
    num = float(np.linalg.norm(apply_operator(F, op).values) * math.sqrt(F.grid.cell_volume))
    return num / (float(np.linalg.norm(t_matrix(op), 2)) * g)


def manufactured_free_field(
    op: FirstOrderOperator, grid: GridSpec, band: float | None = None, seed: int = 0
) -> SampledField:
    """Random mean-zero field with ``F^(xi)`` projected onto ``ker L(xi)`` at every frequency.

    ``band`` cuts the spectrum off at ``|xi| <= band``, default a quarter of
    the axis Nyquist frequency.
    """
    if grid.d != op.d:
        raise ValueError("grid and operator dimensions differ")
    rng = np.random.default_rng(seed)
    band = band if band is not None else grid.n / (8 * grid.L)
    raw = SampledField(grid, rng.standard_normal((op.k,) + grid.shape))
    Fh = spectral_transform(raw).coeffs
    xi = np.stack(np.broadcast_arrays(*grid.frequencies(derivative=True)), axis=0)
    sym = np.tensordot(xi, op.L, axes=([0], [0]))  # (n..., l, k)
    flat = sym.reshape(-1, op.l, op.k)
    proj = np.eye(op.k) - np.linalg.pinv(flat, rcond=1e-12) @ flat
    vec = np.moveaxis(Fh, 0, -1).reshape(-1, op.k, 1)
    out = (proj @ vec)[..., 0].reshape(grid.shape + (op.k,))
    out = np.moveaxis(out, -1, 0)
    rho = np.sqrt(np.sum(xi**2, axis=0))
    # rho = 0 covers the zero mode and the Nyquist corners, where the symbol vanishes
    out = out * ((rho <= band) & (rho > 0))
    kept = np.linalg.norm(out) / max(np.linalg.norm(Fh * (rho <= band)), np.finfo(float).tiny)
    if kept < 1e-8:
        raise ValueError("symbol kernels are trivial on the lattice band; only the zero field is L(D)-free")
    f = inverse_transform(SpectralField(grid, out))
    return f * (1.0 / np.max(np.abs(f.values)))


@dataclass(frozen=True)
class ReductionReport:
    constraint_residual: float
    div_residual: float
    reconstruction_error: float
    t_norm: float
    pinv_norm: float

    @property
    def factor(self) -> float:
        """``||T^+|| ||T||``, the price of passing through the divergence-free case."""
        return self.t_norm * self.pinv_norm


def reduce_to_div(F: SampledField, op: FirstOrderOperator, tol: float = 1e-9) -> tuple[SampledField, ReductionReport]:
    """``T F`` (``l d`` components, row-major) with residual checks.

    ``div_residual`` is ``||div(T F)||_2 / ||F||_2`` with the divergence taken
    row by row; ``reconstruction_error`` is ``||F - T^+ T F||_2 / ||F||_2``.
    """
    res = constraint_residual(F, op)
    if res > tol:
        raise ValueError(f"field is not L(D)-free: relative residual {res:.3e} exceeds {tol:.1e}")
    TM = pseudo_inverse(op)
    TF = SampledField(F.grid, np.tensordot(TM.T, F.values, axes=1))
    back = np.tensordot(TM.pinv, TF.values, axes=1)
    nF = float(np.linalg.norm(F.values)) or 1.0
    xi = F.grid.frequencies(derivative=True)
    TFh = spectral_transform(TF).coeffs
    div = np.zeros((op.l,) + F.grid.shape, dtype=complex)
    for a in range(op.l):
        for i in range(op.d):
            div[a] += 2j * np.pi * xi[i] * TFh[a * op.d + i]
    divf = inverse_transform(SpectralField(F.grid, div))
    rep = ReductionReport(
        res,
        float(np.linalg.norm(divf.values)) / nF,
        float(np.linalg.norm(F.values - back)) / nF,
        TM.norm,
        TM.pinv_norm,
    )
    return TF, rep


def dirac_mass_experiment(
    op: FirstOrderOperator, grid: GridSpec, widths, alpha: float = 1.0
) -> list[tuple[float, float]]:
    """Besov-Lorentz size of ``I_alpha (v phi_eps)`` for ``v`` in the common kernel.

    ``phi_eps`` is a unit-mass Gaussian of width ``eps`` (mean removed); the
    pair list ``(eps, ||I_alpha F||_{B^{0,1}_{p,1}} / ||F||_1)`` grows as
    ``eps -> 0`` when ``L(D)`` fails to be cocancelling.
    """
    from .besov import LittlewoodPaleySpec, besov_norm
    from .grid import lp_norm
    from .heat import riesz_spectral

    rep = is_cocancelling(op)
    if rep:
        raise ValueError("operator is cocancelling; there is no unconstrained direction to load")
    v = rep.kernel_basis[:, 0]
    r2 = grid.radius() ** 2
    out = []
    p = grid.d / (grid.d - alpha)
    for eps in widths:
        bump = np.exp(-r2 / (2 * eps**2)) / (2 * np.pi * eps**2) ** (grid.d / 2)
        bump = bump - bump.mean()
        F = SampledField(grid, v[:, None, None] * bump if grid.d == 2 else np.multiply.outer(v, bump))
        val = besov_norm(riesz_spectral(F, alpha), 0.0, p, 1.0, 1.0, LittlewoodPaleySpec.covering(grid), tail_tol=np.inf)
        out.append((float(eps), val.value / lp_norm(F, 1)))
    return out
