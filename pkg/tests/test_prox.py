import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import l12_objective, prox_l12_enumeration, prox_l12_grid
from sgrec.errors import InvalidInputError
from sgrec.prox import norm_l12, prox_l1, prox_l12, prox_objective, shrink

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, st.integers(1, 8), elements=finite)
weights = st.floats(0, 5, allow_nan=False)


@pytest.mark.parametrize(
    "u, mu, expected",
    [
        ((2.0, -0.5, 1.0), 1.0, (1.0, 0.0, 0.0)),
        ((0.0, 0.0, 0.0), 0.7, (0.0, 0.0, 0.0)),
        ((3.0, 1.0), 1.0, (2.0, 0.0)),
    ],
)
def test_shrink_examples(u, mu, expected):
    np.testing.assert_array_equal(shrink(u, mu), expected)


def test_shrink_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        shrink([1.0, np.nan], 0.1)
    with pytest.raises(InvalidInputError):
        shrink([1.0, np.inf], 0.1)


def test_shrink_rejects_negative_threshold():
    with pytest.raises(InvalidInputError):
        shrink([1.0], -0.1)


@given(vectors, weights)
def test_shrink_is_odd(u, mu):
    np.testing.assert_array_equal(shrink(-u, mu), -shrink(u, mu))


@given(vectors, weights)
def test_shrink_sup_norm(u, mu):
    assert np.max(np.abs(shrink(u, mu))) == pytest.approx(max(np.max(np.abs(u)) - mu, 0.0), abs=1e-12)


@pytest.mark.parametrize(
    "v, theta, expected",
    [((2.0, -0.5), 1.0, (1.0, 0.0)), ((0.3,), 0.5, (0.0,))],
)
def test_prox_l1_examples(v, theta, expected):
    np.testing.assert_array_equal(prox_l1(v, theta), expected)


@given(vectors)
def test_prox_l1_zero_weight_is_identity(v):
    np.testing.assert_array_equal(prox_l1(v, 0.0), v)


def test_prox_l12_zero_vector():
    np.testing.assert_array_equal(prox_l12(np.zeros(4), 1.0), np.zeros(4))


@pytest.mark.parametrize(
    "v, theta, expected",
    [
        ((3.0, 1.0), 1.0, (3.0, 0.0)),  # z = (2, 0), expanded radially
        ((0.5, 0.2), 1.0, (0.5, 0.0)),  # z = 0, 1-sparse branch
    ],
)
def test_prox_l12_examples_against_oracles(v, theta, expected):
    v = np.array(v)
    u = prox_l12(v, theta)
    np.testing.assert_allclose(u, expected, atol=1e-12)
    enum_u, enum_obj = prox_l12_enumeration(v, theta)
    grid_u, grid_obj = prox_l12_grid(v, theta)
    np.testing.assert_allclose(enum_u, expected, atol=1e-6)
    np.testing.assert_allclose(grid_u, expected, atol=1e-6)
    assert abs(prox_objective(u, v, theta) - grid_obj) <= 1e-6


def test_degenerate_branch_objective_values():
    v = np.array([0.5, 0.2])
    assert prox_objective(prox_l12(v, 1.0), v, 1.0) == pytest.approx(0.02)
    assert prox_objective(np.zeros(2), v, 1.0) == pytest.approx(0.145)


def test_degenerate_branch_tie_goes_to_lowest_index():
    np.testing.assert_array_equal(prox_l12([0.3, -0.4, 0.4], 1.0), [0.0, -0.4, 0.0])


def test_prox_l12_rejects_negative_theta():
    with pytest.raises(InvalidInputError):
        prox_l12([1.0, 2.0], -1.0)


@pytest.mark.parametrize("theta", [0.1, 0.5, 1.0])
def test_prox_l12_matches_enumeration_oracle(theta):
    rng = np.random.default_rng(int(theta * 10))
    for _ in range(300):
        v = rng.uniform(-3, 3, 5)
        _, best = prox_l12_enumeration(v, theta)
        assert l12_objective(prox_l12(v, theta), v, theta) <= best + 1e-8


@given(vectors, weights)
def test_prox_l12_radial_expansion(v, theta):
    z = shrink(v, theta)
    zn = np.linalg.norm(z)
    if zn > 0:
        np.testing.assert_allclose(prox_l12(v, theta), z * (1 + theta / zn), rtol=1e-14, atol=0)


@given(vectors, weights)
def test_prox_l12_support_within_input_support(v, theta):
    u = prox_l12(v, theta)
    assert set(np.flatnonzero(u)) <= set(np.flatnonzero(v))


@given(vectors)
def test_norm_l12_nonnegative(x):
    assert norm_l12(x) >= -1e-12
