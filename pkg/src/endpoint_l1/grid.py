"""Periodic uniform grids, sampled fields and their spectral calculus.

Grids cover the box ``[-L/2, L/2)^d`` with ``n`` samples per axis.  The
Fourier convention is ``f^(xi) = int f(x) exp(-2 pi i x.xi) dx`` so that the
heat semigroup acts through the multiplier ``exp(-4 pi^2 t |xi|^2)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "SampledField",
    "SpectralField",
    "integrate",
    "spectral_transform",
    "inverse_transform",
    "apply_multiplier",
    "lp_norm",
    "magnitude",
    "save_field",
    "load_field",
    "stack",
    "band_limited_field",
]


@dataclass(frozen=True)
class GridSpec:
    d: int
    L: float
    n: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"box side must be positive, got {self.L}")
        if self.n < 1 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"samples per axis must be a power of two, got {self.n}")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    def axis(self) -> np.ndarray:
        return -self.L / 2 + self.h * np.arange(self.n)

    def coordinates(self, sparse: bool = True) -> tuple[np.ndarray, ...]:
        """Sample coordinates, one (broadcastable) array per axis."""
        x = self.axis()
        return tuple(np.meshgrid(*([x] * self.d), indexing="ij", sparse=sparse))

    def points(self) -> np.ndarray:
        """All sample points as an ``(n**d, d)`` array in row-major order."""
        return np.stack([c.ravel() for c in self.coordinates(sparse=False)], axis=1)

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coordinates()))

    def frequencies(self, derivative: bool = False) -> tuple[np.ndarray, ...]:
        """Lattice frequencies ``k/L``, ``k`` in ``[-n/2, n/2)``.

        With ``derivative=True`` the unpaired Nyquist frequency is set to zero,
        which keeps odd symbols such as ``2 pi i xi`` Hermitian so derivatives
        of real fields stay real.
        """
        k = np.fft.fftfreq(self.n, d=self.h)
        if derivative and self.n > 1:
            k = k.copy()
            k[self.n // 2] = 0.0
        return tuple(np.meshgrid(*([k] * self.d), indexing="ij", sparse=True))

    def frequency_norm(self, derivative: bool = False) -> np.ndarray:
        return np.sqrt(sum(k**2 for k in self.frequencies(derivative)))

    def to_json(self) -> dict:
        return {"d": self.d, "L": self.L, "n": self.n}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SampledField:
    """Real ``m``-component field on a grid; ``values`` has shape ``(m, n, ..., n)``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape == self.grid.shape:
            v = v[None]
        if v.ndim != self.grid.d + 1 or v.shape[1:] != self.grid.shape:
            raise ValueError(
                f"values of shape {v.shape} do not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def __add__(self, other: "SampledField") -> "SampledField":
        _check_same_grid(self, other)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        _check_same_grid(self, other)
        return SampledField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "SampledField":
        return SampledField(self.grid, c * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "SampledField":
        return SampledField(self.grid, -self.values)

    def component(self, i: int) -> "SampledField":
        return SampledField(self.grid, self.values[i : i + 1])

    def mean(self) -> np.ndarray:
        return self.values.reshape(self.m, -1).mean(axis=1)

    @classmethod
    def zeros(cls, grid: GridSpec, m: int = 1) -> "SampledField":
        return cls(grid, np.zeros((m,) + grid.shape))

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[..., np.ndarray]) -> "SampledField":
        """Sample ``fn(*coords)``; may return one array or a stack of components."""
        out = np.asarray(fn(*grid.coordinates()), dtype=float)
        return cls(grid, np.broadcast_to(out, out.shape[:-grid.d] + grid.shape))


def _check_same_grid(a: SampledField, b: SampledField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    if a.m != b.m:
        raise ValueError(f"component counts differ: {a.m} vs {b.m}")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients ``h^d * DFT(values)``, one array per component."""

    grid: GridSpec
    coeffs: np.ndarray


def integrate(f: SampledField) -> float:
    """Cell-volume weighted sum of a scalar field."""
    if f.m != 1:
        raise ValueError("integrate expects a single-component field")
    return float(np.sum(f.values) * f.grid.cell_volume)


def spectral_transform(f: SampledField) -> SpectralField:
    axes = tuple(range(1, f.grid.d + 1))
    return SpectralField(f.grid, np.fft.fftn(f.values, axes=axes) * f.grid.cell_volume)


def inverse_transform(F: SpectralField, real: bool = True) -> SampledField | np.ndarray:
    """Inverse of :func:`spectral_transform`.

    With ``real=False`` the raw complex samples are returned, which is how the
    imaginary residue of a multiplier is inspected.
    """
    axes = tuple(range(1, F.grid.d + 1))
    v = np.fft.ifftn(F.coeffs, axes=axes) / F.grid.cell_volume
    if not real:
        return v
    return SampledField(F.grid, v.real)


def _evaluate_symbol(
    grid: GridSpec,
    sigma: Callable[..., np.ndarray],
    zero_mode: float | None,
    derivative: bool,
) -> np.ndarray:
    xi = grid.frequencies(derivative)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s = np.asarray(sigma(*xi))
    s = np.broadcast_to(s, s.shape[: s.ndim - grid.d] + grid.shape).copy()
    origin = (...,) + (0,) * grid.d
    if zero_mode is not None:
        s[origin] = zero_mode
    elif not np.all(np.isfinite(s[origin])):
        raise ValueError("zero-mode policy required: symbol is singular at frequency 0")
    if not np.all(np.isfinite(s)):
        raise ValueError("symbol is not finite on the frequency lattice")
    return s


def apply_multiplier(
    f: SampledField,
    sigma: Callable[..., np.ndarray],
    zero_mode: float | None = None,
    derivative: bool = False,
) -> SampledField:
    """Multiply every component of ``f`` by ``sigma(xi_1, ..., xi_d)`` in frequency.

    ``sigma`` receives broadcastable frequency arrays.  A symbol that is
    singular at the origin needs an explicit ``zero_mode`` value (usually 0).
    ``derivative=True`` evaluates the symbol on the Nyquist-free lattice.
    The output keeps the real part only; Hermitian symbols lose nothing.
    """
    s = _evaluate_symbol(f.grid, sigma, zero_mode, derivative)
    F = spectral_transform(f)
    return inverse_transform(SpectralField(f.grid, F.coeffs * s))


def magnitude(f: SampledField) -> np.ndarray:
    """Pointwise Euclidean norm over components."""
    if f.m == 1:
        return np.abs(f.values[0])
    return np.sqrt(np.sum(f.values**2, axis=0))


def lp_norm(f: SampledField, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"lp_norm needs p >= 1, got {p}")
    a = magnitude(f)
    if np.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * f.grid.cell_volume) ** (1.0 / p))


def save_field(f: SampledField, stem: str | Path) -> tuple[Path, Path]:
    """Write ``<stem>.json`` (header) and ``<stem>.bin`` (little-endian float64)."""
    stem = Path(stem)
    header = {**f.grid.to_json(), "m": f.m, "layout": "row-major"}
    hpath, bpath = stem.with_suffix(".json"), stem.with_suffix(".bin")
    hpath.write_text(json.dumps(header, indent=2))
    f.values.astype("<f8").tofile(bpath)
    return hpath, bpath


def load_field(stem: str | Path) -> SampledField:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    if header.get("layout", "row-major") != "row-major":
        raise ValueError(f"unsupported layout {header['layout']!r}")
    grid = GridSpec(int(header["d"]), float(header["L"]), int(header["n"]))
    raw = np.fromfile(stem.with_suffix(".bin"), dtype="<f8")
    expected = header["m"] * grid.n**grid.d
    if raw.size != expected:
        raise ValueError(f"blob holds {raw.size} values, header implies {expected}")
    return SampledField(grid, raw.reshape((header["m"],) + grid.shape))


def stack(fields: Sequence[SampledField]) -> SampledField:
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ValueError("fields live on different grids")
    return SampledField(grid, np.concatenate([f.values for f in fields], axis=0))


def band_limited_field(grid: GridSpec, band: float, m: int = 1, seed: int = 0) -> SampledField:
    """Seeded mean-zero random field with spectrum confined to ``0 < |xi| <= band``.

    Nyquist modes are excluded so spectral derivatives of the result are exact.
    """
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((m,) + grid.shape)
    coeffs = np.fft.fftn(raw, axes=tuple(range(1, grid.d + 1)))
    rho = grid.frequency_norm()
    keep = (rho <= band) & (grid.frequency_norm(derivative=True) == rho)
    coeffs = coeffs * keep
    coeffs[(...,) + (0,) * grid.d] = 0.0
    v = np.fft.ifftn(coeffs, axes=tuple(range(1, grid.d + 1))).real
    scale = np.max(np.abs(v))
    if scale == 0:
        raise ValueError(f"band {band} holds no nonzero lattice frequency (spacing 1/L = {1 / grid.L:.3g})")
    return SampledField(grid, v / scale)
