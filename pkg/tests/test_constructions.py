import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from endpoint_l1 import constructions as cx
from endpoint_l1.grid import GridSpec, spectral_transform
from endpoint_l1.lorentz import sphere_area


def test_first_member():
    u = cx.alvino_sequence(1, 0.5, 2)
    assert np.isclose(u.heights()[0], 2.0) and np.isclose(u.radii()[0], 0.5)
    assert np.isclose(u.bv_norm(), 2 * math.pi, rtol=1e-14)


def test_empty_member_and_bad_q():
    u = cx.alvino_sequence(0, 0.5, 2)
    assert u.bv_norm() == 0.0 and u.log_lorentz_q() == -math.inf
    with pytest.raises(ValueError, match="q<1 only"):
        cx.alvino_sequence(3, 1.0, 2)


@given(st.integers(1, 300), st.floats(0.1, 0.5), st.sampled_from([2, 3]))
def test_structural_invariants(N, q, d):
    u = cx.RadialStepFunction(N, q, d)
    assert np.all(np.diff(u.log_radii) < 0)
    H = u.partial_sums()
    assert H[0] == 0 and np.allclose(np.diff(H), u.heights(), rtol=1e-12)
    assert math.isclose(u.bv_norm(), u.bv_series(), rel_tol=1e-12)
    assert u.lorentz_q() >= cx.alvino_lower_bound(N, q, d)


def test_lower_bound_is_not_universal_in_q():
    # the displayed bound stops dominating once q is well above 1/2
    assert cx.RadialStepFunction(10, 0.8, 2).lorentz_q() < cx.alvino_lower_bound(10, 0.8, 2)


def test_bv_bound_for_q_half():
    limit = sphere_area(2) * math.pi**2 / 6
    assert all(cx.alvino_sequence(N, 0.5, 2).bv_norm() <= limit * (1 + 1e-12) for N in (1, 10, 100, 1000))


@pytest.mark.parametrize("q", [0.3, 0.5])
def test_divergence_check(q):
    rep = cx.alvino_divergence_check(q, 2)
    assert rep.fit.r2 >= 0.99 and rep.dominated and rep.ratio_increasing
    assert max(rep.bv) <= rep.bv_limit


def test_ball_fourier_transform_against_sampled_indicator():
    g = GridSpec(2, 8.0, 512)
    E = cx.FinitePerimeterSet.ball(1.0)
    # low modes of the sampled indicator converge to the exact transform
    coeffs = spectral_transform(E.indicator(g)).coeffs[0]
    rho = g.frequency_norm()
    low = rho < 1.0
    exact = cx.ball_fourier_transform(1.0, 2, rho[low])
    assert np.max(np.abs(np.abs(coeffs[low]) - np.abs(exact))) < 1e-2
    assert np.isclose(cx.ball_fourier_transform(1.0, 3, np.array([0.0]))[0], 4 * math.pi / 3)


def test_finite_perimeter_sets():
    E = cx.FinitePerimeterSet.ball(2.0, 2)
    assert np.isclose(E.volume, 4 * math.pi) and np.isclose(E.perimeter, 4 * math.pi)
    assert np.isclose(E.isoperimetric_ratio(), cx.FinitePerimeterSet.ball_isoperimetric_constant(2))
    assert np.isclose(cx.FinitePerimeterSet.ball_isoperimetric_constant(2), 1 / (2 * math.sqrt(math.pi)))
    with pytest.raises(ValueError):
        cx.FinitePerimeterSet(2, (((0.0, 0.0), 1.0), ((1.0, 0.0), 1.0)))
    two = cx.FinitePerimeterSet(2, (((-2.0, 0.0), 1.0), ((2.0, 0.0), 0.5)))
    assert np.isclose(two.perimeter, 3 * math.pi)
    assert two.isoperimetric_ratio() <= cx.FinitePerimeterSet.ball_isoperimetric_constant(2)


def test_heat_gradient_mass_tracks_perimeter():
    E = cx.FinitePerimeterSet.ball(1.0)
    g = GridSpec(2, 4.0, 512)
    from endpoint_l1.grid import lp_norm

    assert abs(lp_norm(E.heat_gradient(g, 1e-3), 1) / E.perimeter - 1) < 0.02


def test_riesz_counterexample_small():
    out = cx.riesz_counterexample_norms((1, 2), n=512)
    assert np.isclose(out["q"], 0.5 * 1.5)
    assert all(math.isfinite(r["ratio"]) and r["ratio"] > 0 for r in out["rows"])


def test_riesz_counterexample_resolution_guard():
    with pytest.raises(ValueError, match="largest feasible N"):
        cx.riesz_counterexample_norms((1, 2, 3, 4), n=256)
