import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimfree.errors import DimensionMismatch, NotSkew, OddDimension, UnsupportedOrder
from dimfree.esdd import lift, reduce
from dimfree.projector import projector_matrix
from dimfree.tensors import (
    QuadFormGen, TensorFieldGen, eval_tensor, is_closed, is_riemannian_at, is_skew,
    is_symmetric, is_symplectic_at, lift_quadratic_form, lift_tensor, tensor_at_class,
)

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"
rng = np.random.default_rng(5)

# second row read as (-cos, 0, sin, 0), mirroring the first
TWISTED = TensorFieldGen.from_exprs(
    [["0", "sin(x1+x2)", "0", "cos(x1+x2)"], ["-cos(x1+x2)", "0", "sin(x1+x2)", "0"]],
    dim=2, r=2, s=1)
SIGMA = QuadFormGen.constant([[0, -1], [1, 0]])


def sphere_metric() -> QuadFormGen:
    data = json.loads((CONFIGS / "sphere_metric.json").read_text())
    return QuadFormGen.from_exprs(data["quadratic_form"]["M"])


def sphere_metric_oracle(x1, x2):
    rho = 1 + x1 ** 2 + x2 ** 2
    J = np.array([[2 - 2 * x1 ** 2 + 2 * x2 ** 2, -4 * x1 * x2],
                  [-4 * x1 * x2, 2 + 2 * x1 ** 2 - 2 * x2 ** 2],
                  [-4 * x1, -4 * x2]]) / rho ** 2
    return J.T @ J


def test_eval_identity_form():
    m = 3
    T = TensorFieldGen.constant(np.eye(m).reshape(1, -1), m, 2, 0)
    X1, X2 = rng.standard_normal((2, m))
    assert eval_tensor(T, np.zeros(m), [X1, X2]) == pytest.approx(X1 @ X2)


def test_eval_printed_structure_matrix():
    e1, e2 = np.eye(2)
    assert eval_tensor(TWISTED, [math.pi / 2, 0], [e1, e2], [e1]) == pytest.approx(1.0)


def test_eval_skew_form_antisymmetric():
    T = TensorFieldGen.constant([[0, -1, 1, 0]], 2, 2, 0)
    X, Y = rng.standard_normal((2, 2))
    assert eval_tensor(T, [0, 0], [X, Y]) == pytest.approx(-eval_tensor(T, [0, 0], [Y, X]))


def test_eval_argument_checks():
    with pytest.raises(DimensionMismatch):
        eval_tensor(TWISTED, [0, 0], [[1, 0]], [[1, 0]])
    with pytest.raises(DimensionMismatch):
        eval_tensor(TWISTED, [0, 0], [[1, 0], [1, 0, 0]], [[1, 0]])


def test_orders_above_two_rejected():
    with pytest.raises(UnsupportedOrder):
        TensorFieldGen.constant(np.ones((1, 8)), 2, 3, 0)
    with pytest.raises(UnsupportedOrder):
        TensorFieldGen.from_exprs([["1"] * 8], 2, 3, 0)


def test_lift_k1_unchanged():
    assert lift_tensor(TWISTED, 1) is TWISTED


def test_lift_block_pattern_on_four():
    y = np.array([0.1, 0.2, 0.3, 0.5])
    G = lift_tensor(TWISTED, 2)(y)
    s, c = math.sin(y.sum() / 2), math.cos(y.sum() / 2)
    Z, S, C = np.zeros((2, 2)), np.full((2, 2), s), np.full((2, 2), c)
    ref = np.block([[Z, S, Z, S, Z, C, Z, C], [-C, Z, -C, Z, S, Z, S, Z]]) / 4
    np.testing.assert_allclose(G, ref, atol=1e-10)


def test_tensor_at_class_uses_common_leaf():
    y, G = tensor_at_class(TWISTED, reduce([0.1, 0.2, 0.3]))
    assert y.size == 6 and G.shape == (6, 36)


def _random_tensor(m, r, s, seed):
    gen = np.random.default_rng(seed)
    coeffs = gen.integers(-2, 3, size=(m ** s, m ** r, 3))
    rows = [[f"({a})+({b})*x1+({c})*x{m}^2" for a, b, c in row] for row in coeffs]
    return TensorFieldGen.from_exprs(rows, m, r, s)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(1, 0), (2, 0), (1, 1), (2, 1)]), st.integers(1, 3),
       st.integers(1, 3), st.integers(0, 10 ** 6))
def test_value_preservation(order, m, k, seed):
    r, s = order
    T = _random_tensor(m, r, s, seed)
    gen = np.random.default_rng(seed + 1)
    x = gen.standard_normal(m)
    Xs, Ws = list(gen.standard_normal((r, m))), list(gen.standard_normal((s, m)))
    up, down = projector_matrix(m, k * m), projector_matrix(k * m, m)
    base = eval_tensor(T, x, Xs, Ws)
    lifted = eval_tensor(lift_tensor(T, k), up @ x, [up @ X for X in Xs], [w @ down for w in Ws])
    assert abs(lifted - base) <= 1e-10 * max(1.0, abs(base))


def test_quadratic_form_lift_examples():
    Q = lift_quadratic_form(QuadFormGen.constant(np.eye(2)), 4)
    X1, X2 = rng.standard_normal((2, 2))
    up = projector_matrix(2, 4)
    assert Q.evaluate(np.zeros(4), up @ X1, up @ X2) == pytest.approx(X1 @ X2, abs=1e-12)
    lifted = lift_quadratic_form(SIGMA, 4)(np.zeros(4))
    np.testing.assert_allclose(lifted, np.kron(SIGMA(0), np.ones((2, 2))) / 4)
    assert is_skew(lift_quadratic_form(SIGMA, 4), [np.zeros(4)])
    np.testing.assert_allclose(sphere_metric()([0, 0]), 4 * np.eye(2))


def test_sphere_metric_config_matches_oracle():
    M = sphere_metric()
    for x in rng.uniform(-2, 2, size=(10, 2)):
        np.testing.assert_allclose(M(x), sphere_metric_oracle(*x), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(2, 4), st.integers(0, 10 ** 6))
def test_quadratic_form_value_and_symmetry_preserved(m, k, seed):
    gen = np.random.default_rng(seed)
    M = gen.standard_normal((m, m))
    for base in (M + M.T, M - M.T):
        Q = QuadFormGen.constant(base)
        Qk = lift_quadratic_form(Q, k * m)
        X1, X2 = gen.standard_normal((2, m))
        up = projector_matrix(m, k * m)
        assert Qk.evaluate(np.zeros(k * m), up @ X1, up @ X2) == pytest.approx(
            Q.evaluate(np.zeros(m), X1, X2), abs=1e-12)
        pts = [np.zeros(k * m)]
        assert is_symmetric(Qk, pts) == is_symmetric(Q, [np.zeros(m)])
        assert is_skew(Qk, pts) == is_skew(Q, [np.zeros(m)])


def test_symmetry_predicates():
    pts = [np.zeros(2), np.ones(2)]
    assert is_skew(SIGMA, pts) and not is_symmetric(SIGMA, pts)
    assert is_symmetric(sphere_metric(), rng.standard_normal((5, 2)))
    R = QuadFormGen.constant([[1, 2], [3, 4]])
    assert not is_skew(R, pts) and not is_symmetric(R, pts)


def test_closedness_examples():
    pts = list(rng.standard_normal((4, 2)))
    assert is_closed(SIGMA, pts)
    assert is_closed(QuadFormGen.from_exprs([["0", "x1"], ["-x1", "0"]]), pts)
    twisted = QuadFormGen.from_exprs([["0", "x3", "0"], ["-x3", "0", "0"], ["0", "0", "0"]])
    assert not is_closed(twisted, list(rng.standard_normal((3, 3))))
    with pytest.raises(NotSkew):
        is_closed(QuadFormGen.constant(np.eye(2)), pts)


def test_closedness_is_pointwise():
    Q = QuadFormGen.from_exprs([
        ["0", "x2*x3", "-x1^2"],
        ["-x2*x3", "0", "sin(x1)"],
        ["x1^2", "-sin(x1)", "0"]])
    d = lambda z: np.array([[0, z[1] * z[2], -z[0] ** 2],  # noqa: E731
                            [-z[1] * z[2], 0, math.sin(z[0])],
                            [z[0] ** 2, -math.sin(z[0]), 0]])
    z = rng.standard_normal(3)
    np.testing.assert_allclose(Q(z), d(z))
    # cyclic sum d1 g23 + d2 g31 + d3 g12 = cos(x1) + 0 + x2, so closed only where it vanishes
    assert not is_closed(Q, [np.array([0.0, 0.5, 0.0])])
    assert is_closed(Q, [np.array([math.pi, 1.0, 0.3])])


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_closedness_invariant_under_constant_skew_shift(a, b):
    base = QuadFormGen.from_exprs([["0", "x1*x2"], ["-x1*x2", "0"]])
    shifted = QuadFormGen.from_exprs([["0", f"x1*x2+{a!r}"], [f"-x1*x2-{a!r}", "0"]])
    pts = [np.array([a, b])]
    assert is_closed(base, pts) == is_closed(shifted, pts)


def test_riemannian_and_symplectic():
    grid = [np.array([u, v]) for u in np.linspace(-2, 2, 5) for v in np.linspace(-2, 2, 5)]
    assert is_riemannian_at(sphere_metric(), grid)
    assert is_symplectic_at(SIGMA, grid)
    assert not is_riemannian_at(QuadFormGen.constant(np.diag([1, -1])), grid)
    assert not is_symplectic_at(QuadFormGen.constant(np.zeros((2, 2))), grid)
    with pytest.raises(OddDimension):
        is_symplectic_at(QuadFormGen.constant(np.zeros((3, 3))), [np.zeros(3)])


def test_two_zero_tensor_as_form():
    T = TensorFieldGen.constant([[0, -1, 1, 0]], 2, 2, 0)
    np.testing.assert_array_equal(T.as_quadratic_form()([0, 0]), [[0, -1], [1, 0]])
    with pytest.raises(DimensionMismatch):
        TWISTED.as_quadratic_form()


def test_lift_of_class_representatives_agree():
    T = _random_tensor(2, 2, 0, 3)
    x = np.array([0.3, -0.7])
    X1, X2 = rng.standard_normal((2, 2))
    base = eval_tensor(T, x, [X1, X2])
    for k in (2, 3):
        up = projector_matrix(2, 2 * k)
        assert eval_tensor(lift_tensor(T, k), lift(x, k), [up @ X1, up @ X2]) == pytest.approx(base)
