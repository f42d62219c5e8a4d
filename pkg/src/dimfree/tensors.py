"""Tensor fields of order up to (2, 2) through their structure matrices.

A tensor field with ``r`` covariant and ``s`` contravariant slots on
``R^m`` is stored as a matrix-valued function ``gamma(x)`` of shape
``m**s x m**r``. Its value on vectors ``X1 … Xr`` and rows ``w1 … ws`` is

    (ws ⊗ … ⊗ w1) @ gamma(x) @ (X1 ⊗ … ⊗ Xr).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce as _fold
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotSkew, OddDimension, UnsupportedOrder
from .esdd import EquivClass, lift
from .fieldlang import parse
from .fields import jacobian
from .projector import projector_matrix

__all__ = [
    "TensorFieldGen", "QuadFormGen", "eval_tensor", "lift_tensor",
    "tensor_at_class", "lift_quadratic_form", "is_symmetric", "is_skew",
    "is_closed", "is_riemannian_at", "is_symplectic_at",
]

MAX_ORDER = 2


def _kron_all(factors: Sequence[np.ndarray], empty_shape) -> np.ndarray:
    if not factors:
        return np.ones(empty_shape)
    return _fold(np.kron, factors)


def _matrix_of_exprs(rows, dim: int):
    """Compile a nested list of expression strings (or numbers) into a callable."""
    exprs = [[parse(str(e), dim) for e in row] for row in rows]
    width = {len(r) for r in exprs}
    if len(width) != 1:
        raise DimensionMismatch("structure matrix rows differ in length")

    def gamma(x):
        return np.array([[e.evaluate(x) for e in row] for row in exprs])

    return gamma, (len(exprs), width.pop())


@dataclass(frozen=True)
class TensorFieldGen:
    """Generator of a dimension-free tensor field with orders ``(r, s)``.

    ``gamma(x)`` returns the ``m**s x m**r`` structure matrix at ``x``.
    """

    dim: int
    r: int
    s: int
    gamma: Callable = field(repr=False)

    def __post_init__(self):
        if not (0 <= self.r <= MAX_ORDER and 0 <= self.s <= MAX_ORDER):
            raise UnsupportedOrder(f"orders (r, s) = ({self.r}, {self.s}) exceed (2, 2)")

    @property
    def shape(self) -> tuple[int, int]:
        return self.dim ** self.s, self.dim ** self.r

    @classmethod
    def from_exprs(cls, rows, dim: int, r: int, s: int) -> "TensorFieldGen":
        if not (0 <= r <= MAX_ORDER and 0 <= s <= MAX_ORDER):
            raise UnsupportedOrder(f"orders (r, s) = ({r}, {s}) exceed (2, 2)")
        gamma, shape = _matrix_of_exprs(rows, dim)
        if shape != (dim ** s, dim ** r):
            raise DimensionMismatch(
                f"structure matrix is {shape[0]}x{shape[1]}, expected "
                f"{dim ** s}x{dim ** r}")
        return cls(dim, r, s, gamma)

    @classmethod
    def constant(cls, matrix, dim: int, r: int, s: int) -> "TensorFieldGen":
        matrix = np.array(matrix, dtype=float).reshape(dim ** s, dim ** r)
        return cls(dim, r, s, lambda x: matrix)

    def __call__(self, x) -> np.ndarray:
        g = np.asarray(self.gamma(np.asarray(x, dtype=float)), dtype=float)
        return g.reshape(self.shape)

    def as_quadratic_form(self) -> "QuadFormGen":
        """View an ``(r, s) = (2, 0)`` tensor as a quadratic form."""
        if (self.r, self.s) != (2, 0):
            raise DimensionMismatch("only (2, 0) tensors are quadratic forms")
        m = self.dim
        return QuadFormGen(m, lambda x: self(x).reshape(m, m))


def eval_tensor(T: TensorFieldGen, x, Xs: Sequence = (), Ws: Sequence = ()) -> float:
    """Value of ``T`` at ``x`` on vectors ``Xs`` and rows ``Ws``.

    Raises
    ------
    DimensionMismatch
        If the argument counts differ from ``(r, s)`` or a dimension is off.
    """
    if len(Xs) != T.r or len(Ws) != T.s:
        raise DimensionMismatch(f"expected {T.r} vectors and {T.s} covectors")
    Xs = [np.asarray(X, dtype=float).ravel() for X in Xs]
    Ws = [np.asarray(W, dtype=float).ravel() for W in Ws]
    if any(v.size != T.dim for v in (*Xs, *Ws)) or np.size(x) != T.dim:
        raise DimensionMismatch(f"all arguments must lie in R^{T.dim}")
    right = _kron_all(Xs, 1)
    left = _kron_all(Ws[::-1], 1)
    return float(left @ T(x) @ right)


def lift_tensor(T: TensorFieldGen, k: int) -> TensorFieldGen:
    """Structure matrix of the lift of ``T`` on ``R^(k m)``.

    ``gamma_k(y) = U^{⊗s} gamma(D y) D^{⊗r}`` with ``D`` the projector
    ``R^(km) -> R^m`` and ``U`` the projector back. Evaluating the lift on
    lifted arguments (vectors ``U X``, rows ``w D``) gives the value of
    ``T`` on the original arguments.
    """
    if k == 1:
        return T
    m, q = T.dim, k * T.dim
    down, up = projector_matrix(q, m), projector_matrix(m, q)
    left = _kron_all([up] * T.s, (1, 1))
    right = _kron_all([down] * T.r, (1, 1))

    def gamma(y):
        return left @ T(down @ y) @ right

    return TensorFieldGen(q, T.r, T.s, gamma)


def tensor_at_class(T: TensorFieldGen, a: EquivClass, k: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Point and lifted structure matrix of ``T`` on the ``k``-th leaf of ``a``.

    The leaf has dimension ``k * lcm(dim a, m)``.
    """
    p = np.lcm(a.dim, T.dim)
    y = lift(np.asarray(a.rep, dtype=float), k * p // a.dim)
    return y, lift_tensor(T, y.size // T.dim)(y)


@dataclass(frozen=True)
class QuadFormGen:
    """Quadratic form ``(X1, X2) -> X1^T M(x) X2`` on ``R^dim``."""

    dim: int
    M: Callable = field(repr=False)

    @classmethod
    def from_exprs(cls, rows, dim: int | None = None) -> "QuadFormGen":
        dim = len(rows) if dim is None else dim
        gamma, shape = _matrix_of_exprs(rows, dim)
        if shape != (dim, dim):
            raise DimensionMismatch(f"quadratic form must be {dim}x{dim}")
        return cls(dim, gamma)

    @classmethod
    def constant(cls, matrix) -> "QuadFormGen":
        matrix = np.array(matrix, dtype=float)
        return cls(matrix.shape[0], lambda x: matrix)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.M(np.asarray(x, dtype=float)), dtype=float).reshape(
            self.dim, self.dim)

    def evaluate(self, x, X1, X2) -> float:
        return float(np.asarray(X1, dtype=float) @ self(x) @ np.asarray(X2, dtype=float))


def lift_quadratic_form(Q: QuadFormGen, q: int) -> QuadFormGen:
    """The form ``M_q(y) = P^T M(P y) P`` on ``R^q``, ``P`` the projector to ``R^m``."""
    if q == Q.dim:
        return Q
    down = projector_matrix(q, Q.dim)
    return QuadFormGen(q, lambda y: down.T @ Q(down @ y) @ down)


def _scale(M: np.ndarray) -> float:
    return max(1.0, float(np.abs(M).max()))


def is_symmetric(Q: QuadFormGen, points, tol: float = 1e-10) -> bool:
    """``M(x) == M(x)^T`` at every sample point."""
    return all(np.abs(M - M.T).max() <= tol * _scale(M)
               for M in (Q(p) for p in points))


def is_skew(Q: QuadFormGen, points, tol: float = 1e-10) -> bool:
    """``M(x) == -M(x)^T`` at every sample point."""
    return all(np.abs(M + M.T).max() <= tol * _scale(M)
               for M in (Q(p) for p in points))


def is_closed(Q: QuadFormGen, points, tol: float = 1e-6) -> bool:
    """Cyclic-sum closedness test for a skew form at every sample point.

    Checks ``d_i g_jk + d_j g_ki + d_k g_ij = 0`` for all index triples,
    with partial derivatives by central differences.

    Raises
    ------
    NotSkew
        If the form is not skew at one of the points.
    """
    m = Q.dim
    for p in points:
        if not is_skew(Q, [p]):
            raise NotSkew(f"form is not skew at {np.asarray(p).tolist()}")
        # d[i, j, k] = partial of g_ij along coordinate k
        d = jacobian(lambda z: Q(z).ravel(), p).reshape(m, m, m)
        scale = _scale(d)
        for i, j, k in itertools.product(range(m), repeat=3):
            if abs(d[j, k, i] + d[k, i, j] + d[i, j, k]) > tol * scale:
                return False
    return True


def is_riemannian_at(Q: QuadFormGen, points, tol_pd: float = 1e-10) -> bool:
    """Symmetric and positive definite at every sample point."""
    if not is_symmetric(Q, points):
        return False
    return all(np.linalg.eigvalsh(Q(p)).min() > tol_pd for p in points)


def is_symplectic_at(Q: QuadFormGen, points, tol_ns: float = 1e-10) -> bool:
    """Skew, non-singular and closed at every sample point.

    Raises
    ------
    OddDimension
        If the generator dimension is odd.
    """
    if Q.dim % 2:
        raise OddDimension(f"symplectic forms need even dimension, got {Q.dim}")
    if not is_skew(Q, points):
        return False
    if any(abs(np.linalg.det(Q(p))) <= tol_ns for p in points):
        return False
    return is_closed(Q, points)
