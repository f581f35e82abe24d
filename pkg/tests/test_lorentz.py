import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from endpoint_l1.grid import GridSpec, SampledField, lp_norm
from endpoint_l1.lorentz import (
    DistributionProfile,
    LorentzParams,
    ball_volume,
    distribution_profile,
    lorentz_norm,
    radial_step_lorentz_exact,
    radial_step_lorentz_log,
    sphere_area,
)


@st.composite
def profiles(draw):
    k = draw(st.integers(1, 6))
    levels = np.unique(np.array(draw(st.lists(st.floats(0.05, 20.0), min_size=k, max_size=k))))
    measures = np.sort(np.array(draw(st.lists(st.floats(0.01, 10.0), min_size=levels.size, max_size=levels.size))))[::-1]
    return DistributionProfile(levels, measures.copy())


exponents = st.floats(1.05, 6.0)


def test_unit_ball_constants():
    assert np.isclose(ball_volume(2), math.pi)
    assert np.isclose(ball_volume(3), 4 * math.pi / 3)
    assert np.isclose(sphere_area(2), 2 * math.pi)
    assert np.isclose(sphere_area(3), 4 * math.pi)


@given(exponents, st.floats(0.2, 8.0), st.floats(0.01, 100.0))
def test_indicator_closed_form(p, q, measure):
    prof = DistributionProfile(np.array([1.0]), np.array([measure]))
    assert np.isclose(lorentz_norm(prof, LorentzParams(p, q)), (p / q) ** (1 / q) * measure ** (1 / p), rtol=1e-12)


@given(profiles(), exponents)
def test_diagonal_case_is_lp(prof, p):
    t, lam = prof.levels, prof.measures
    lp = np.sum(lam * np.diff(np.r_[0.0, t**p])) ** (1 / p)
    assert np.isclose(lorentz_norm(prof, LorentzParams(p, p)), lp, rtol=1e-12)


@given(profiles(), exponents, st.floats(0.2, 8.0), st.floats(0.2, 8.0))
def test_nesting_in_q(prof, p, qa, qb):
    q1, q2 = sorted((qa, qb))
    assume(q1 <= p)
    small = lorentz_norm(prof, LorentzParams(p, q1))
    large = lorentz_norm(prof, LorentzParams(p, q2))
    assert large <= small * (1 + 1e-12)
    assert lorentz_norm(prof, LorentzParams(p, math.inf)) <= small * (1 + 1e-12)


@given(profiles(), exponents, st.floats(0.2, 8.0), st.floats(0.01, 100.0))
def test_homogeneity(prof, p, q, c):
    a = lorentz_norm(prof.scaled(c), LorentzParams(p, q))
    assert np.isclose(a, c * lorentz_norm(prof, LorentzParams(p, q)), rtol=1e-10)


def test_weak_norm_is_the_supremum():
    prof = DistributionProfile(np.array([1.0, 2.0]), np.array([4.0, 1.0]))
    assert np.isclose(lorentz_norm(prof, LorentzParams(2.0, math.inf)), max(1 * 2.0, 2 * 1.0))


def test_sampled_profile_counts_cells():
    g = GridSpec(2, 2.0, 4)
    v = np.zeros(g.shape)
    v[0, 0], v[1, 1], v[2, 2] = 3.0, -1.0, 1.0
    prof = distribution_profile(SampledField(g, v))
    assert np.allclose(prof.levels, [1.0, 3.0])
    assert np.allclose(prof.measures, [3 * 0.25, 0.25])
    # q = p recovers the grid L^p norm
    f = SampledField(g, v)
    assert np.isclose(lorentz_norm(prof, LorentzParams(3.0, 3.0)), lp_norm(f, 3))


def test_radial_steps_exact_vs_sampled():
    h, r = np.array([1.0, 2.0]), np.array([1.0, 0.5])
    exact = radial_step_lorentz_exact(h, r, 2, LorentzParams(2.0, 1.0))
    g = GridSpec(2, 4.0, 1024)
    rad = g.radius()
    u = SampledField(g, 1.0 * (rad < 1.0) + 2.0 * (rad < 0.5))
    sampled = lorentz_norm(distribution_profile(u), LorentzParams(2.0, 1.0))
    assert abs(sampled - exact) / exact < 5e-3


def test_log_route_survives_huge_heights():
    i = np.arange(1, 1025, dtype=float)
    log_h = i * math.log(2)
    log_r = -(np.log(i) / 0.5 + i * math.log(2))
    val = radial_step_lorentz_log(log_h, log_r, 2, LorentzParams(2.0, 0.5))
    assert math.isfinite(val)


@pytest.mark.parametrize("p,q", [(1.0, 1.0), (math.inf, 1.0), (2.0, 0.0)])
def test_bad_exponents(p, q):
    with pytest.raises(ValueError):
        LorentzParams(p, q)


def test_radii_must_decrease():
    with pytest.raises(ValueError, match="decreasing"):
        radial_step_lorentz_exact(np.array([1.0, 1.0]), np.array([0.5, 1.0]), 2, LorentzParams(2.0, 1.0))


def test_profile_csv(tmp_path):
    prof = DistributionProfile(np.array([1.0, 2.0]), np.array([3.0, 1.0]))
    text = prof.to_csv(tmp_path / "p.csv").read_text().splitlines()
    assert len(text) == 3
