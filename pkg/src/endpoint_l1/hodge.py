"""Differential forms on the periodic grid and the Hodge system ``d* Z = F, dZ = G``.

A ``k``-form stores its ``C(d, k)`` coefficients in lexicographic order of the
multi-indices.  ``d`` and ``d*`` are the constant-coefficient operators built
in :mod:`endpoint_l1.cocancel`; ``d*`` is the formal adjoint of ``d`` for the
grid inner product, so ``dd* + d*d = -Delta`` componentwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .besov import LittlewoodPaleySpec, besov_norm
from .cocancel import FirstOrderOperator, apply_operator, constraint_residual
from .grid import GridSpec, SampledField, apply_multiplier, lp_norm
from .heat import check_mean_zero, riesz_spectral

__all__ = [
    "KForm",
    "multi_indices",
    "exterior_d",
    "codifferential",
    "hodge_laplacian",
    "inverse_laplacian",
    "HodgeSolution",
    "solve_hodge",
    "verify_corollary_potentials",
    "hodge_besov_ratio",
    "save_kform",
    "load_kform",
]


def multi_indices(d: int, k: int) -> list[tuple[int, ...]]:
    return list(combinations(range(d), k))


@dataclass(frozen=True, eq=False)
class KForm:
    k: int
    field: SampledField

    def __post_init__(self):
        d = self.field.grid.d
        if not 0 <= self.k <= d:
            raise ValueError(f"form degree must lie in [0, {d}], got {self.k}")
        if self.field.m != math.comb(d, self.k):
            raise ValueError(f"a {self.k}-form in R^{d} has {math.comb(d, self.k)} components, got {self.field.m}")

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    @property
    def d(self) -> int:
        return self.field.grid.d

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return multi_indices(self.d, self.k)

    def __add__(self, other: "KForm") -> "KForm":
        if other.k != self.k:
            raise ValueError("cannot add forms of different degree")
        return KForm(self.k, self.field + other.field)

    def __sub__(self, other: "KForm") -> "KForm":
        if other.k != self.k:
            raise ValueError("cannot subtract forms of different degree")
        return KForm(self.k, self.field - other.field)

    def __mul__(self, c: float) -> "KForm":
        return KForm(self.k, self.field * c)

    __rmul__ = __mul__

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def inner(self, other: "KForm") -> float:
        """Grid ``L^2`` pairing."""
        if other.k != self.k:
            raise ValueError("pairing needs equal degrees")
        return float(np.sum(self.values * other.values) * self.grid.cell_volume)

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self), 0.0))

    @classmethod
    def zeros(cls, grid: GridSpec, k: int) -> "KForm":
        return cls(k, SampledField.zeros(grid, math.comb(grid.d, k)))


def exterior_d(w: KForm) -> KForm:
    if w.k >= w.d:
        raise ValueError(f"exterior derivative of a top-degree form ({w.k}-form in R^{w.d}) is not defined here")
    op = FirstOrderOperator.exterior_derivative(w.d, w.k)
    return KForm(w.k + 1, apply_operator(w.field, op))


def codifferential(w: KForm) -> KForm:
    if w.k == 0:
        raise ValueError("codifferential of a 0-form is not defined here")
    op = FirstOrderOperator.codifferential(w.d, w.k)
    return KForm(w.k - 1, apply_operator(w.field, op))


def hodge_laplacian(w: KForm) -> KForm:
    """``dd* w + d*d w``; terms that would leave the degree range are dropped."""
    out = KForm.zeros(w.grid, w.k)
    if w.k > 0:
        out = out + exterior_d(codifferential(w))
    if w.k < w.d:
        out = out + codifferential(exterior_d(w))
    return out


def _inverse_laplacian_symbol(*xi):
    k2 = sum(x**2 for x in xi)
    with np.errstate(divide="ignore"):
        s = 1.0 / (4 * np.pi**2 * k2)
    # frequencies that vanish on the derivative lattice carry no gradient; drop them
    s[~np.isfinite(s)] = 0.0
    return s


def inverse_laplacian(w: KForm) -> KForm:
    """``(-Delta)^{-1}`` per component on the Nyquist-free lattice, zero mode annihilated."""
    return KForm(w.k, apply_multiplier(w.field, _inverse_laplacian_symbol, zero_mode=0.0, derivative=True))


@dataclass(frozen=True, eq=False)
class HodgeSolution:
    Z: KForm
    codiff_residual: float
    d_residual: float


def _rel(a: KForm, b: KForm | None) -> float:
    if b is None:
        return a.norm()
    nb = b.norm()
    return (a - b).norm() / nb if nb > 0 else (a - b).norm()


def solve_hodge(
    F: KForm | None,
    G: KForm | None,
    k: int,
    grid: GridSpec | None = None,
    strict: bool = True,
    tol: float = 1e-9,
) -> HodgeSolution:
    """``Z = d (-Delta)^{-1} F + d* (-Delta)^{-1} G`` for a ``(k-1)``-form ``F`` and ``(k+1)``-form ``G``.

    ``None`` stands for the zero form.  Inputs must be mean-zero and satisfy
    ``d* F = 0`` and ``dG = 0``.  With ``strict`` the estimate's own
    restrictions apply: ``F = 0`` when ``k = 1`` and ``G = 0`` when ``k = d - 1``.
    """
    grid = grid or (F.grid if F is not None else G.grid if G is not None else None)
    if grid is None:
        raise ValueError("a grid is needed when both data forms are absent")
    d = grid.d
    if not 1 <= k <= d - 1:
        raise ValueError(f"Hodge system needs 1 <= k <= d - 1, got k={k} in R^{d}")
    F = F if F is not None else KForm.zeros(grid, k - 1)
    G = G if G is not None else KForm.zeros(grid, k + 1)
    if F.k != k - 1 or G.k != k + 1:
        raise ValueError(f"F must be a {k - 1}-form and G a {k + 1}-form")
    for name, w in (("F", F), ("G", G)):
        if np.any(w.values):
            check_mean_zero(w.field, f"Hodge data {name}")
    if strict and k == 1 and np.any(F.values):
        raise ValueError("the estimate for k=1 requires F = 0")
    if strict and k == d - 1 and np.any(G.values):
        raise ValueError("the estimate for k=d-1 requires G = 0")
    if F.k >= 1 and np.any(F.values):
        r = constraint_residual(F.field, FirstOrderOperator.codifferential(d, F.k))
        if r > tol:
            raise ValueError(f"compatibility d*F = 0 violated: relative residual {r:.3e}")
    if G.k <= d - 1 and np.any(G.values):
        r = constraint_residual(G.field, FirstOrderOperator.exterior_derivative(d, G.k))
        if r > tol:
            raise ValueError(f"compatibility dG = 0 violated: relative residual {r:.3e}")
    Z = KForm.zeros(grid, k)
    if np.any(F.values):
        Z = Z + exterior_d(inverse_laplacian(F))
    if np.any(G.values):
        Z = Z + codifferential(inverse_laplacian(G))
    return HodgeSolution(Z, _rel(codifferential(Z), F), _rel(exterior_d(Z), G))


def _besov_01(f: SampledField, alpha: float) -> float:
    p = f.grid.d / (f.grid.d - alpha)
    return besov_norm(f, 0.0, p, 1.0, 1.0, LittlewoodPaleySpec.covering(f.grid), tail_tol=np.inf).value


def verify_corollary_potentials(u: KForm, alpha: float = 1.0) -> dict:
    """``||I_alpha du||_{B^{0,1}_{d/(d-alpha),1}} / ||du||_1`` and the ``d*`` analogue.

    Each ratio carries ``in_range``: true for ``k <= d-2`` (the ``d`` branch)
    and for ``k >= 2`` (the ``d*`` branch), where the constraints ``d(du) = 0``
    and ``d*(d*u) = 0`` are cocancelling.
    """
    d = u.d
    out = {"k": u.k, "alpha": alpha}
    branches = []
    if u.k < d:
        branches.append(("d", exterior_d, u.k <= d - 2))
    if u.k > 0:
        branches.append(("codifferential", codifferential, u.k >= 2))
    for name, fn, ok in branches:
        w = fn(u)
        rhs = lp_norm(w.field, 1)
        if rhs == 0:
            out[name] = {"lhs": 0.0, "rhs": 0.0, "ratio": 0.0, "in_range": ok, "trivial": True}
            continue
        lhs = _besov_01(riesz_spectral(w.field, alpha), alpha)
        entry = {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs, "in_range": ok, "trivial": False}
        if not ok:
            entry["note"] = "outside Corollary range"
        out[name] = entry
    return out


def hodge_besov_ratio(F: KForm | None, G: KForm | None, k: int, grid: GridSpec | None = None, strict: bool = True) -> dict:
    """``||Z||_{B^{0,1}_{d/(d-1),1}} / (||F||_1 + ||G||_1)`` for the Hodge solution ``Z``."""
    sol = solve_hodge(F, G, k, grid, strict)
    rhs = (lp_norm(F.field, 1) if F is not None else 0.0) + (lp_norm(G.field, 1) if G is not None else 0.0)
    if rhs == 0:
        return {"trivial": True, "lhs": 0.0, "rhs": 0.0, "ratio": None}
    lhs = _besov_01(sol.Z.field, 1.0)
    return {
        "trivial": False,
        "lhs": lhs,
        "rhs": rhs,
        "ratio": lhs / rhs,
        "codiff_residual": sol.codiff_residual,
        "d_residual": sol.d_residual,
    }


def save_kform(w: KForm, stem: str | Path) -> Path:
    """Header ``<stem>.json`` plus one little-endian float64 blob per component."""
    stem = Path(stem)
    names = ["".join(str(i + 1) for i in I) or "0" for I in w.indices]
    header = {**w.grid.to_json(), "k": w.k, "order": "lex", "components": names, "layout": "row-major"}
    for j, name in enumerate(names):
        w.values[j].astype("<f8").tofile(stem.parent / f"{stem.name}.c{name}.bin")
    hpath = stem.with_suffix(".json")
    hpath.write_text(json.dumps(header, indent=2))
    return hpath


def load_kform(stem: str | Path) -> KForm:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    if header.get("order") != "lex":
        raise ValueError(f"unsupported component order {header.get('order')!r}")
    grid = GridSpec(int(header["d"]), float(header["L"]), int(header["n"]))
    comps = []
    for name in header["components"]:
        raw = np.fromfile(stem.parent / f"{stem.name}.c{name}.bin", dtype="<f8")
        if raw.size != grid.n**grid.d:
            raise ValueError(f"component {name} holds {raw.size} values, expected {grid.n**grid.d}")
        comps.append(raw.reshape(grid.shape))
    return KForm(int(header["k"]), SampledField(grid, np.stack(comps)))
