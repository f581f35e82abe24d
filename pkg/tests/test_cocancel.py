import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from endpoint_l1 import cocancel as cc
from endpoint_l1.cocancel import FirstOrderOperator
from endpoint_l1.grid import GridSpec, band_limited_field

G = GridSpec(2, 2 * np.pi, 64)
COMMON = FirstOrderOperator(np.array([[[1, 0], [0, 0]], [[1, 0], [0, 0]]], float))
STACKED = FirstOrderOperator(np.array([[[1, 0], [2, 0]], [[0, 1], [0, 2]]], float))


@pytest.mark.parametrize("d", [2, 3])
def test_divergence_is_cocancelling(d):
    rep = cc.is_cocancelling(FirstOrderOperator.divergence(d))
    assert rep and rep.rank == d and rep.kernel_basis.shape == (d, 0)


def test_common_kernel_operator():
    rep = cc.is_cocancelling(COMMON)
    assert not rep
    assert cc.subspace_distance(rep.kernel_basis, np.array([[0.0], [1.0]])) <= 1e-10
    assert cc.subspace_distance(rep.kernel_basis, cc.common_kernel_sampled(COMMON)) <= 1e-10
    with pytest.raises(ValueError, match="not injective"):
        cc.pseudo_inverse(COMMON)


@pytest.mark.parametrize("d", [2, 3])
def test_exterior_calculus_ranges(d):
    for k in range(d):
        assert bool(cc.is_cocancelling(FirstOrderOperator.exterior_derivative(d, k))) == (k <= d - 1)
    for k in range(1, d + 1):
        assert cc.is_cocancelling(FirstOrderOperator.codifferential(d, k))


def test_gradient_is_not_cocancelling():
    # grad acts on scalars; every constant direction shares the zero kernel only
    assert cc.is_cocancelling(FirstOrderOperator.gradient(2))


@st.composite
def planted_kernel_ops(draw):
    d, k, l = draw(st.integers(2, 3)), draw(st.integers(2, 4)), draw(st.integers(1, 3))
    seed = draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(k)
    P = np.eye(k) - np.outer(v, v) / (v @ v)
    L = rng.standard_normal((d, l, k)) @ P
    return FirstOrderOperator(L), v


@given(planted_kernel_ops())
def test_planted_common_kernel_is_found(case):
    op, v = case
    rep = cc.is_cocancelling(op)
    assert not rep
    assert cc.subspace_distance(rep.kernel_basis, cc.common_kernel_sampled(op)) <= 1e-8
    # the planted direction lies in the reported kernel
    basis = rep.kernel_basis
    resid = v - basis @ (basis.T @ v)
    assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(v)


@given(st.integers(0, 10_000), st.integers(2, 3))
def test_symbol_is_linear_in_xi(seed, d):
    rng = np.random.default_rng(seed)
    op = FirstOrderOperator(rng.standard_normal((d, 2, 3)))
    a, b = rng.standard_normal(d), rng.standard_normal(d)
    assert np.allclose(cc.symbol(op, a + 2 * b), cc.symbol(op, a) + 2 * cc.symbol(op, b), atol=1e-12)


@given(st.integers(0, 10_000))
def test_injective_t_matrix_inverts(seed):
    rng = np.random.default_rng(seed)
    op = FirstOrderOperator(rng.standard_normal((2, 3, 2)))
    TM = cc.pseudo_inverse(op)
    assert np.max(np.abs(TM.pinv @ TM.T - np.eye(2))) < 1e-10


def test_t_matrix_rows_are_ordered_by_row_then_direction():
    T = cc.t_matrix(STACKED)
    assert np.array_equal(T[0], STACKED.L[0][0]) and np.array_equal(T[1], STACKED.L[1][0])
    assert np.array_equal(T[2], STACKED.L[0][1])


def test_reduction_on_manufactured_fields():
    for seed in range(3):
        F = cc.manufactured_free_field(STACKED, G, seed=seed)
        assert cc.constraint_residual(F, STACKED) < 1e-12
        TF, rep = cc.reduce_to_div(F, STACKED)
        assert TF.m == STACKED.l * STACKED.d
        assert rep.div_residual <= 1e-9 and rep.reconstruction_error <= 1e-10


def test_reduction_rejects_unconstrained_fields():
    with pytest.raises(ValueError, match="L\\(D\\)-free"):
        cc.reduce_to_div(band_limited_field(G, 4.0, m=2, seed=1), STACKED)


def test_trivial_kernel_detected():
    op = FirstOrderOperator(np.random.default_rng(0).standard_normal((2, 3, 2)))
    with pytest.raises(ValueError, match="trivial"):
        cc.manufactured_free_field(op, G)


def test_operator_json_roundtrip(tmp_path):
    path = STACKED.save(tmp_path / "op.json")
    assert np.array_equal(FirstOrderOperator.load(path).L, STACKED.L)


def test_dirac_experiment_grows_for_common_kernel_operator():
    pairs = cc.dirac_mass_experiment(COMMON, GridSpec(2, 2.0, 128), [0.08, 0.04, 0.02])
    vals = [v for _, v in pairs]
    assert vals[0] < vals[1] < vals[2]
    with pytest.raises(ValueError, match="cocancelling"):
        cc.dirac_mass_experiment(FirstOrderOperator.divergence(2), G, [0.1])
