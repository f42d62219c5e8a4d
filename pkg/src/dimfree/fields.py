"""Functions, vector fields and covector fields defined across dimensions.

Each field is given by a generator on a fixed ``R^m``. Evaluating it on a
vector of another dimension ``q`` goes through the projectors: a point is
first projected to ``R^m``, the generator is evaluated there and the value
is carried back to ``R^q``. When ``q`` is a multiple of ``m`` this is an
exact lift; otherwise it is the least-squares approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch
from .esdd import EquivClass, as_vector, lift
from .fieldlang import parse, parse_vector_exprs
from .projector import projector_matrix

__all__ = [
    "ScalarFieldGen", "VectorFieldGen", "CovectorFieldGen", "extend_function",
    "lift_vector_field", "lift_covector_field", "lift_is_exact", "realize_field",
    "pair", "jacobian", "differential", "lie_bracket",
]

_FD_EPS = np.finfo(float).eps ** (1.0 / 3.0)


def _point(x) -> np.ndarray:
    return np.asarray(as_vector(x), dtype=float)


@dataclass(frozen=True)
class ScalarFieldGen:
    """Generator ``f: R^dim -> R`` of a dimension-free function."""

    dim: int
    func: Callable = field(repr=False)
    input_dim: int = 0
    text: str | None = None

    @classmethod
    def from_expr(cls, text: str, dim: int, input_dim: int = 0) -> "ScalarFieldGen":
        e = parse(text, dim, input_dim)
        return cls(dim, e.evaluate, input_dim, str(e))

    @classmethod
    def linear(cls, c) -> "ScalarFieldGen":
        c = np.asarray(c, dtype=float).ravel()
        return cls(c.size, lambda x, u=None, t=0.0: float(c @ x))

    def __call__(self, x, u=None, t: float = 0.0) -> float:
        return float(self.func(_point(x), u, t))


@dataclass(frozen=True)
class VectorFieldGen:
    """Generator ``X: R^dim -> R^dim`` of a dimension-free vector field.

    ``func(x, u, t)`` may depend on an input of dimension ``input_dim``.
    """

    dim: int
    func: Callable = field(repr=False)
    input_dim: int = 0
    texts: tuple[str, ...] | None = None

    @classmethod
    def from_exprs(cls, texts: Sequence[str], input_dim: int = 0) -> "VectorFieldGen":
        vec = parse_vector_exprs(texts, len(texts), input_dim)
        return cls(len(texts), vec.evaluate, input_dim, tuple(vec.texts()))

    @classmethod
    def linear(cls, A, B=None) -> "VectorFieldGen":
        """The field ``Ax`` or the control field ``Ax + Bu``."""
        A = np.array(A, dtype=float)
        if B is None:
            return cls(A.shape[0], lambda x, u=None, t=0.0: A @ x)
        B = np.array(B, dtype=float).reshape(A.shape[0], -1)
        return cls(A.shape[0], lambda x, u=None, t=0.0: A @ x + B @ np.ravel(u),
                   B.shape[1])

    def __call__(self, x, u=None, t: float = 0.0) -> np.ndarray:
        x = _point(x)
        if x.size != self.dim:
            raise DimensionMismatch(f"field on R^{self.dim} evaluated at R^{x.size}")
        return np.asarray(self.func(x, u, t), dtype=float).reshape(self.dim)


@dataclass(frozen=True)
class CovectorFieldGen:
    """Generator of a dimension-free covector field; values are rows."""

    dim: int
    func: Callable = field(repr=False)
    texts: tuple[str, ...] | None = None

    @classmethod
    def from_exprs(cls, texts: Sequence[str]) -> "CovectorFieldGen":
        vec = parse_vector_exprs(texts, len(texts))
        return cls(len(texts), vec.evaluate, tuple(vec.texts()))

    @classmethod
    def constant(cls, row) -> "CovectorFieldGen":
        row = np.array(row, dtype=float).ravel()
        return cls(row.size, lambda x, u=None, t=0.0: row)

    def __call__(self, x, u=None, t: float = 0.0) -> np.ndarray:
        x = _point(x)
        if x.size != self.dim:
            raise DimensionMismatch(f"covector on R^{self.dim} evaluated at R^{x.size}")
        return np.asarray(self.func(x, u, t), dtype=float).reshape(self.dim)


def extend_function(f: ScalarFieldGen, a, u=None, t: float = 0.0) -> float:
    """Value of the dimension-free extension of ``f`` at ``a``.

    ``a`` may be an :class:`EquivClass` or any representative; the value
    does not depend on the representative chosen.
    """
    y = _point(a.rep if isinstance(a, EquivClass) else a)
    return f(projector_matrix(y.size, f.dim) @ y, u, t)


def lift_is_exact(gen_dim: int, q: int) -> bool:
    """Whether evaluating a ``gen_dim`` generator on ``R^q`` is an exact lift."""
    return q % gen_dim == 0


def lift_vector_field(X: VectorFieldGen, y, u=None, t: float = 0.0) -> np.ndarray:
    """Evaluate the lift of ``X`` at ``y`` in ``R^q``, ``q = dim(y)``.

    Computes ``P(m->q) X(P(q->m) y)``. Exact when ``q`` is a multiple of
    ``X.dim`` (see :func:`lift_is_exact`), a least-squares approximation
    otherwise.
    """
    y = _point(y)
    q, m = y.size, X.dim
    if q == m:
        return X(y, u, t)
    return projector_matrix(m, q) @ X(projector_matrix(q, m) @ y, u, t)


def realize_field(X: VectorFieldGen, q: int) -> VectorFieldGen:
    """The lift of ``X`` on ``R^q`` as a generator in its own right."""
    if q == X.dim:
        return X
    down, up = projector_matrix(q, X.dim), projector_matrix(X.dim, q)
    return VectorFieldGen(q, lambda y, u=None, t=0.0: up @ X(down @ y, u, t),
                          X.input_dim)


def lift_covector_field(w: CovectorFieldGen, y, u=None, t: float = 0.0) -> np.ndarray:
    """Evaluate the lift of ``w`` at ``y``: ``w(P(q->m) y) P(q->m)`` as a row."""
    y = _point(y)
    if y.size == w.dim:
        return w(y, u, t)
    down = projector_matrix(y.size, w.dim)
    return w(down @ y, u, t) @ down


def pair(w: CovectorFieldGen, X: VectorFieldGen, a, k: int = 1,
         u=None, t: float = 0.0) -> float:
    """Action of the lifted covector field on the lifted vector field at ``a``.

    Both are evaluated on the ``k``-th common leaf, of dimension
    ``k * lcm(dim a, m)``. The result does not depend on ``k``.

    Raises
    ------
    DimensionMismatch
        If ``w`` and ``X`` have different generator dimensions.
    """
    if w.dim != X.dim:
        raise DimensionMismatch(f"covector on R^{w.dim} paired with field on R^{X.dim}")
    rep = _point(a.rep if isinstance(a, EquivClass) else a)
    q = k * math.lcm(rep.size, X.dim)
    y = lift(rep, q // rep.size)
    return float(lift_covector_field(w, y, u, t) @ lift_vector_field(X, y, u, t))


def jacobian(func: Callable[[np.ndarray], np.ndarray], z) -> np.ndarray:
    """Central-difference Jacobian of ``func`` at ``z``.

    The step for coordinate ``i`` is ``max(1, |z_i|) * eps**(1/3)``.
    """
    z = _point(z)
    f0 = np.atleast_1d(func(z))
    jac = np.empty((f0.size, z.size))
    for i in range(z.size):
        h = max(1.0, abs(z[i])) * _FD_EPS
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        jac[:, i] = (np.atleast_1d(func(zp)) - np.atleast_1d(func(zm))) / (2 * h)
    return jac


def differential(f: ScalarFieldGen) -> CovectorFieldGen:
    """Numerical differential of ``f`` as a covector field generator."""
    return CovectorFieldGen(
        f.dim, lambda x, u=None, t=0.0: jacobian(lambda z: f(z, u, t), x)[0])


def lie_bracket(X: VectorFieldGen, Y: VectorFieldGen) -> VectorFieldGen:
    """Lie bracket ``[X, Y]`` as a generator on ``R^lcm(dim X, dim Y)``.

    Both fields are lifted to the common dimension and the bracket is
    ``(dY) X - (dX) Y`` with Jacobians by central differences, so results
    carry finite-difference error of roughly ``1e-8`` relative.
    """
    m = math.lcm(X.dim, Y.dim)
    Xm, Ym = realize_field(X, m), realize_field(Y, m)

    def bracket(z, u=None, t=0.0):
        jx = jacobian(lambda s: Xm(s, u, t), z)
        jy = jacobian(lambda s: Ym(s, u, t), z)
        return jy @ Xm(z, u, t) - jx @ Ym(z, u, t)

    return VectorFieldGen(m, bracket, max(X.input_dim, Y.input_dim))
