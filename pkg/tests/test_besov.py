import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from endpoint_l1 import besov
from endpoint_l1.cocancel import FirstOrderOperator, manufactured_free_field
from endpoint_l1.grid import GridSpec, SampledField, band_limited_field
from endpoint_l1.heat import QuadratureSpec, riesz_spectral

G = GridSpec(2, 8.0, 64)


@given(st.floats(-2.0, 3.0))
def test_smooth_step_range(s):
    v = float(besov.smooth_step(np.array([s]))[0])
    assert 0.0 <= v <= 1.0
    if s <= 0:
        assert v == 0.0
    if s >= 1:
        assert v == 1.0


def test_psi_hat_shape():
    rho = np.linspace(0, 2, 2001)
    v = besov.psi_hat(rho)
    assert np.all(v[rho <= 0.5] == 1.0) and np.all(v[rho >= 1.0] == 0.0)
    assert np.all(np.diff(v) <= 1e-15)


@given(st.floats(1e-3, 1e3), st.integers(-6, 0), st.integers(1, 8))
def test_blocks_telescope(rho, n0, width):
    total = sum(besov.block_symbol(n)(np.array(rho)) for n in range(n0, n0 + width))
    expected = besov.psi_hat(np.array(rho / 2.0 ** (n0 + width))) - besov.psi_hat(np.array(rho / 2.0**n0))
    assert np.isclose(total, expected, atol=1e-13)


@given(st.integers(0, 200))
def test_blocks_reconstruct_band_limited_fields(seed):
    f = band_limited_field(G, 3.0, seed=seed)
    spec = besov.LittlewoodPaleySpec.covering(G)
    total = sum(besov.lp_block(f, n, spec).values for n in spec.blocks)
    assert np.max(np.abs(total - f.values)) < 1e-12


def test_spec_defaults():
    spec = besov.LittlewoodPaleySpec.default_for(G)
    assert spec.n_min == math.floor(math.log2(1 / G.L))
    assert spec.n_max == math.floor(math.log2(G.n / (4 * G.L)))
    with pytest.raises(ValueError):
        besov.LittlewoodPaleySpec(3, 1)


def test_besov_norm_single_block_field():
    # a lattice mode with |xi| = 1 lives in blocks -1 and 0 only
    X, Y = G.coordinates()
    f = SampledField(G, np.cos(2 * np.pi * X) * np.ones(G.shape))
    res = besov.besov_norm(f, 0.0, 2.0, 1.0, None)
    parts = {row[0]: row[1] for row in res.blocks}
    live = [n for n, v in parts.items() if v > 1e-12]
    assert set(live) <= {-1, 0}
    assert np.isclose(res.value, sum(parts.values()))
    assert res.value >= besov.field_lorentz_norm(f, 2.0, None) * (1 - 1e-12)


def test_besov_tail_error_names_the_required_range():
    f = band_limited_field(G, 3.8, seed=0)
    with pytest.raises(ValueError, match="block"):
        besov.besov_norm(f, 0.0, 2.0, 1.0, 1.0, besov.LittlewoodPaleySpec(-1, 0))


@given(st.floats(0.2, 1.8))
def test_m_hat_support(alpha):
    rho = np.array([0.1, 0.5, 0.6, 1.0, 1.9, 2.0, 3.0])
    v = besov.m_hat(rho, alpha)
    assert v[0] == v[1] == v[5] == v[6] == 0.0
    assert np.all(v[2:5] > 0)


def test_block_zero_symbol_matches_the_multiplier_definition():
    rho = np.linspace(0.55, 1.95, 50)
    lhs = besov.block_symbol(0)(rho) * (2 * np.pi * rho) ** (-1.0)
    rhs = np.exp(-4 * np.pi**2 * rho**2) * besov.m_hat(rho, 1.0)
    assert np.allclose(lhs, rhs, rtol=1e-12)


def test_multiplier_l1_norm_against_fft_oracle():
    # independent route: sample m^ on a fine lattice and Riemann-sum |m| after an FFT
    g = GridSpec(2, 256.0, 2048)
    rho = g.frequency_norm()
    mh = besov.m_hat(rho, 1.0)
    m = np.fft.ifftn(mh).real * g.n**2 / g.L**2
    oracle = float(np.sum(np.abs(m)) * g.cell_volume)
    value = besov.multiplier_l1_norm(1.0, 2)
    assert abs(value / oracle - 1) < 1e-4
    assert abs(math.log(value) - 134.3356) < 1e-3


def test_multiplier_identity_on_small_grid():
    g = GridSpec(2, 16.0, 256)
    F = band_limited_field(g, 6.0, seed=4)
    for n in (-1, 0, 1):
        rep = besov.verify_multiplier_identity(F, 1.0, n, check_dilation=False)
        assert rep.discrepancy < 1e-8
    with pytest.raises(ValueError, match="not resolved"):
        besov.verify_multiplier_identity(F, 1.0, 3, check_dilation=False)


def test_continuous_majorant_dominates_discrete_with_the_stated_constant():
    F = band_limited_field(G, 1.0, seed=7)
    quad = QuadratureSpec(1e-10 * G.h**2, 100 * G.L**2, 8)
    for alpha in (0.5, 1.0, 1.5):
        cont = besov.continuous_majorant(F, alpha, quad=quad).value
        disc = besov.discrete_majorant(F, alpha).value
        assert disc <= besov.discrete_to_continuous_constant(alpha) * cont
        lhs = besov.besov_norm(riesz_spectral(F, alpha), 0.0, 2 / (2 - alpha), 1.0, 1.0).value
        assert lhs <= 2 * besov.multiplier_l1_norm(alpha, 2) / math.log(2) * cont


def test_majorant_insists_on_covered_time_range():
    F = band_limited_field(G, 1.0, seed=7)
    with pytest.raises(ValueError, match="decayed"):
        besov.continuous_majorant(F, 1.0, quad=QuadratureSpec(1e-2, 1e-1, 8))


def test_duality_ratios_are_finite_for_constrained_fields():
    F = manufactured_free_field(FirstOrderOperator.divergence(2), G, seed=2)
    phi = band_limited_field(G, 2.0, m=2, seed=3)
    for mode in ("gradient", "besov"):
        rep = besov.duality_ratio(F, phi, mode)
        assert math.isfinite(rep.ratio) and rep.constraint_residual < 1e-9
    curl_free = SampledField(G, np.stack([np.cos(2 * np.pi * G.coordinates()[0] / G.L) * np.ones(G.shape),
                                          np.zeros(G.shape)]))
    with pytest.raises(ValueError, match="constraint"):
        besov.duality_ratio(curl_free, phi)
