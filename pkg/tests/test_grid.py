import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from endpoint_l1.grid import (
    GridSpec,
    SampledField,
    apply_multiplier,
    band_limited_field,
    integrate,
    inverse_transform,
    load_field,
    lp_norm,
    save_field,
    spectral_transform,
    stack,
)

grids = st.builds(
    GridSpec,
    d=st.sampled_from([1, 2, 3]),
    L=st.floats(0.5, 20.0),
    n=st.sampled_from([8, 16]),
)


@pytest.mark.parametrize("kw", [dict(d=4, L=1.0, n=8), dict(d=2, L=0.0, n=8), dict(d=2, L=1.0, n=12)])
def test_gridspec_rejects_bad_parameters(kw):
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_sampled_field_shape_and_finiteness():
    g = GridSpec(2, 1.0, 8)
    with pytest.raises(ValueError):
        SampledField(g, np.zeros((8, 4)))
    with pytest.raises(ValueError):
        SampledField(g, np.full((8, 8), np.nan))
    f = SampledField(g, np.zeros((8, 8)))
    assert f.m == 1 and not f.values.flags.writeable


@given(grids, st.integers(0, 2**32 - 1))
def test_transform_roundtrip(grid, seed):
    f = SampledField(grid, np.random.default_rng(seed).standard_normal((2,) + grid.shape))
    back = inverse_transform(spectral_transform(f))
    assert np.allclose(back.values, f.values, atol=1e-12)


@given(grids, st.integers(0, 2**32 - 1))
def test_parseval(grid, seed):
    f = SampledField(grid, np.random.default_rng(seed).standard_normal(grid.shape))
    F = spectral_transform(f)
    lhs = np.sum(f.values**2) * grid.cell_volume
    rhs = np.sum(np.abs(F.coeffs) ** 2) / grid.L**grid.d
    assert np.isclose(lhs, rhs, rtol=1e-12)


def test_zero_frequency_coefficient_is_the_integral():
    g = GridSpec(2, 3.0, 16)
    X, Y = g.coordinates()
    f = SampledField(g, np.exp(-(X**2 + Y**2)))
    assert np.isclose(spectral_transform(f).coeffs[0, 0, 0].real, integrate(f), rtol=1e-14)


def test_spectral_derivative_of_a_lattice_mode_is_exact():
    g = GridSpec(1, 2 * np.pi, 64)
    (x,) = g.coordinates()
    f = SampledField(g, np.sin(3 * x))
    df = apply_multiplier(f, lambda k: 2j * np.pi * k, derivative=True)
    assert np.max(np.abs(df.values[0] - 3 * np.cos(3 * x))) < 1e-12


def test_singular_symbol_needs_zero_mode_policy():
    g = GridSpec(2, 1.0, 8)
    f = SampledField(g, np.ones(g.shape))
    with pytest.raises(ValueError, match="zero-mode"):
        apply_multiplier(f, lambda *xi: 1 / np.sqrt(sum(k**2 for k in xi)))
    out = apply_multiplier(f, lambda *xi: 1 / np.sqrt(sum(k**2 for k in xi)), zero_mode=0.0)
    assert np.allclose(out.values, 0.0)


def test_nyquist_is_zeroed_only_on_the_derivative_lattice():
    g = GridSpec(1, 1.0, 8)
    assert g.frequencies()[0][4] != 0
    assert g.frequencies(derivative=True)[0][4] == 0


def test_lp_norms_of_constants():
    g = GridSpec(3, 2.0, 8)
    f = SampledField(g, np.full((2,) + g.shape, 3.0))
    mag = 3 * np.sqrt(2)
    assert np.isclose(lp_norm(f, 1), mag * 8)
    assert np.isclose(lp_norm(f, 2), mag * np.sqrt(8))
    assert np.isclose(lp_norm(f, np.inf), mag)
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_save_load_roundtrip(tmp_path):
    g = GridSpec(2, 1.5, 16)
    f = band_limited_field(g, 4.0, m=2, seed=3)
    save_field(f, tmp_path / "field")
    back = load_field(tmp_path / "field")
    assert back.grid == g and np.array_equal(back.values, f.values)
    (tmp_path / "field.bin").write_bytes(b"\0" * 8)
    with pytest.raises(ValueError, match="blob"):
        load_field(tmp_path / "field")


@given(st.integers(0, 1000), st.floats(1.0, 6.0))
def test_band_limited_field_is_mean_zero_and_band_limited(seed, band):
    g = GridSpec(2, 2.0, 32)
    f = band_limited_field(g, band, seed=seed)
    F = spectral_transform(f).coeffs[0]
    assert abs(F[0, 0]) < 1e-12
    assert np.max(np.abs(F[g.frequency_norm() > band])) < 1e-12
    assert np.isclose(np.max(np.abs(f.values)), 1.0)


def test_band_without_lattice_modes_is_an_error():
    with pytest.raises(ValueError, match="band"):
        band_limited_field(GridSpec(2, 1.0, 16), 0.5)


def test_stack_requires_common_grid():
    a = SampledField(GridSpec(1, 1.0, 8), np.zeros(8))
    b = SampledField(GridSpec(1, 2.0, 8), np.zeros(8))
    assert stack([a, a]).m == 2
    with pytest.raises(ValueError):
        stack([a, b])
