from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimfree.esdd import inner, lift, reduce, vminus
from dimfree.projector import (
    build_projector, exact_projector, project, project_class, projector_matrix,
)


def test_printed_projectors():
    np.testing.assert_array_equal(
        exact_projector(5, 3) * 5,
        np.array([[3, 2, 0, 0, 0], [0, 1, 3, 1, 0], [0, 0, 0, 2, 3]], dtype=object))
    np.testing.assert_array_equal(
        exact_projector(3, 2) * 3, np.array([[2, 1, 0], [0, 1, 2]], dtype=object))
    np.testing.assert_array_equal(
        exact_projector(2, 3) * 2, np.array([[2, 0], [1, 1], [0, 2]], dtype=object))
    np.testing.assert_array_equal(projector_matrix(4, 4), np.eye(4))


def test_exact_entries_are_fractions():
    assert all(isinstance(v, Fraction) for v in exact_projector(7, 3).ravel())


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 9) for m in range(1, 9)])
def test_row_stochastic_and_full_rank(n, m):
    P = projector_matrix(n, m)
    assert P.shape == (m, n)
    assert (P >= 0).all()
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-15)
    assert np.linalg.matrix_rank(P) == min(n, m)
    t = np.lcm(n, m)
    alpha, beta = t // n, t // m
    np.testing.assert_allclose(projector_matrix(m, n), beta / alpha * P.T, atol=1e-15)


def test_matches_kronecker_definition():
    for n, m in [(7, 3), (4, 6), (5, 5), (2, 9)]:
        t = np.lcm(n, m)
        alpha, beta = t // n, t // m
        ref = (np.kron(np.eye(m), np.ones((1, beta)))
               @ np.kron(np.eye(n), np.ones((alpha, 1)))) / beta
        np.testing.assert_allclose(projector_matrix(n, m), ref, atol=1e-15)


def test_project_examples():
    np.testing.assert_allclose(project([1.0, 0, -1, 0, 1, 2, -2], 3), [2 / 7, 0, 1 / 7])
    assert list(project([1, 0, -1, 0, 1, 2, -2], 3)) == [Fraction(2, 7), 0, Fraction(1, 7)]
    np.testing.assert_allclose(project([2.5] * 5, 3), [2.5] * 3)
    np.testing.assert_array_equal(project([1, 2], 4), [1, 1, 2, 2])


def test_project_class_examples():
    np.testing.assert_array_equal(project_class(reduce([1, 1, 2, 2]), 2), [1, 2])
    np.testing.assert_array_equal(project_class(reduce([1, 0, -1, 0, 1, 2, -2]), 3),
                                  project([1, 0, -1, 0, 1, 2, -2], 3))


def test_projection_is_least_squares():
    # the nearest point of R^m in the cross-dimensional distance solves an
    # ordinary least-squares problem on the common dimension
    rng = np.random.default_rng(3)
    for _ in range(20):
        n, m = rng.integers(1, 9, size=2)
        x = rng.standard_normal(n)
        t = np.lcm(n, m)
        design = np.kron(np.eye(m), np.ones((t // m, 1)))
        ref = np.linalg.lstsq(design, lift(x, t // n), rcond=None)[0]
        np.testing.assert_allclose(project(x, m), ref, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=9), st.integers(1, 9))
def test_residual_orthogonal(xi, m):
    x = project(np.array(xi), m)
    assert abs(inner(vminus(np.array(xi), x), x)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=1, max_size=6), st.integers(1, 4), st.integers(1, 6))
def test_representative_independence(x, k, m):
    assert list(project(lift(np.array(x), k), m)) == list(project(np.array(x), m))


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("k", range(1, 7))
def test_lift_then_project_is_identity_exactly(m, k):
    product = exact_projector(k * m, m) @ exact_projector(m, k * m)
    assert (product == np.eye(m, dtype=int)).all()


def test_csv_export():
    text = build_projector(3, 2).to_csv()
    rows = [list(map(float, line.split(","))) for line in text.splitlines()]
    np.testing.assert_allclose(rows, projector_matrix(3, 2))
