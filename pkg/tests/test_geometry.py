import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsurf import (
    Band,
    ConfigurationError,
    DomainError,
    HalfSpace,
    explicit_grid,
    halfspace_at,
    make_direction_grid,
)

ALL_BUILTIN = [(1, 2, None), (2, 4, None), (2, 7, None), (2, 360, None),
               (3, 50, None), (3, 100, None)]


def test_1d_grid_is_the_sign_pair():
    g = make_direction_grid(1, 2)
    assert g.directions.tolist() == [[1.0], [-1.0]]
    assert g.antipode.tolist() == [1, 0]
    assert g.antipode_exact


def test_2d_axis_grid_and_exact_antipodes():
    g = make_direction_grid(2, 4)
    expected = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
    assert np.allclose(g.directions, expected, atol=1e-12)
    assert g.antipode[0] == 2
    assert g.antipode_exact
    # exact elementwise negation between halves
    assert np.array_equal(g.directions[2:], -g.directions[:2])


def test_2d_even_antipode_index_formula():
    for k in (4, 8, 60, 360):
        g = make_direction_grid(2, k)
        assert np.array_equal(g.antipode, (np.arange(k) + k // 2) % k)


def _max_nn_gap(U):
    # brute force: per direction, angle to its nearest distinct neighbor
    cosang = np.clip(U @ U.T, -1.0, 1.0)
    np.fill_diagonal(cosang, -2.0)
    return float(np.arccos(cosang.max(axis=1)).max())


def test_fibonacci_sphere_gap_shrinks_with_k():
    g50 = make_direction_grid(3, 50)
    g100 = make_direction_grid(3, 100)
    assert len(g100) == 100
    assert _max_nn_gap(g100.directions) < _max_nn_gap(g50.directions)


@pytest.mark.parametrize("d,k,scheme", ALL_BUILTIN)
def test_every_grid_direction_is_unit(d, k, scheme):
    g = make_direction_grid(d, k, scheme)
    assert np.all(np.abs(np.linalg.norm(g.directions, axis=1) - 1.0) <= 1e-12)
    assert len(g) == k


def test_unsupported_grid_configs():
    with pytest.raises(ConfigurationError):
        make_direction_grid(4, 10)
    with pytest.raises(ConfigurationError):
        make_direction_grid(1, 4)
    with pytest.raises(ConfigurationError):
        make_direction_grid(2, 1)
    with pytest.raises(ConfigurationError):
        make_direction_grid(2, 8, "fibonacci-sphere-3d")
    with pytest.raises(ConfigurationError):
        make_direction_grid(2, 8, "nonsense")


def test_explicit_grid_rejects_duplicates_and_zeros():
    with pytest.raises(ConfigurationError):
        explicit_grid([[1.0, 0.0], [2.0, 0.0]])  # same direction after normalizing
    with pytest.raises(ConfigurationError):
        explicit_grid([[0.0, 0.0], [1.0, 0.0]])
    g = explicit_grid([[3.0, 4.0], [0.0, -2.0]])
    assert np.allclose(np.linalg.norm(g.directions, axis=1), 1.0)


def test_halfspace_axis_aligned_example():
    h = halfspace_at([0.0, 0.0], [1.0, 0.0], 1.5)
    assert h.c == 1.5
    assert h.contains([1.0, 7.0])
    assert not h.contains([2.0, 0.0])


def test_halfspace_canonical_form_is_observer_free():
    h1 = halfspace_at([0.0, 0.0], [1.0, 0.0], 1.5)
    h2 = halfspace_at([3.0, 0.0], [1.0, 0.0], -1.5)
    assert h1.c == h2.c and np.array_equal(h1.u, h2.u)


def test_halfspace_diagonal_offset():
    s = math.sqrt(2.0) / 2.0
    h = halfspace_at([1.0, 1.0], [s, s], 0.0)
    assert h.c == pytest.approx(math.sqrt(2.0), abs=1e-15)


@given(
    O=st.tuples(st.integers(-50, 50), st.integers(-50, 50)),
    O2=st.tuples(st.integers(-50, 50), st.integers(-50, 50)),
    y=st.integers(-50, 50),
    axis=st.integers(0, 1),
    sign=st.sampled_from([1.0, -1.0]),
)
@settings(max_examples=60, deadline=None)
def test_observer_cancellation_exact_on_integers(O, O2, y, axis, sign):
    # integer data keeps the algebra exact in floating point
    u = np.zeros(2)
    u[axis] = sign
    O, O2 = np.array(O, dtype=float), np.array(O2, dtype=float)
    h1 = halfspace_at(O, u, float(y))
    h2 = halfspace_at(O2, u, float(y) + float((O - O2) @ u))
    assert h1.c == h2.c


@given(
    coords=st.lists(st.floats(-20, 20), min_size=2, max_size=2),
    c1=st.floats(-10, 10),
    dc=st.floats(0, 10),
)
@settings(max_examples=60, deadline=None)
def test_contains_monotone_in_offset(coords, c1, dc):
    u = np.array([0.6, 0.8])
    h_small = HalfSpace(u, c1)
    h_big = HalfSpace(u, c1 + dc)
    if h_small.contains(coords):
        assert h_big.contains(coords)


def test_band_requires_ordered_edges():
    with pytest.raises(DomainError):
        Band(np.array([1.0, 0.0]), 2.0, 2.0)
    b = Band(np.array([1.0, 0.0]), 0.0, 1.0)
    assert b.contains([0.5, 3.0])
    assert not b.contains([0.0, 0.0])  # lower edge excluded
    assert b.contains([1.0, 0.0])  # upper edge included
    assert b.width == 1.0


def test_direction_validation():
    with pytest.raises(DomainError):
        HalfSpace(np.array([1.0, 1.0]), 0.0)  # not unit
    with pytest.raises(DomainError):
        halfspace_at([0.0, 0.0], [1.0, 0.0], math.inf)
