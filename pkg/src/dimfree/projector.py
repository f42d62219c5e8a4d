"""Least-squares projection between Euclidean spaces of different dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .esdd import EquivClass, as_vector, _is_exact

__all__ = [
    "Projector", "build_projector", "projector_matrix", "exact_projector",
    "project", "project_class",
]


def _overlap_counts(n: int, m: int) -> tuple[np.ndarray, int]:
    """Integer numerators of the projector and their common denominator.

    Entry ``(i, j)`` counts the points of the common refinement of size
    ``lcm(n, m)`` that fall in target block ``i`` and source block ``j``.
    """
    t = math.lcm(n, m)
    alpha, beta = t // n, t // m
    rows = np.kron(np.eye(m, dtype=np.int64), np.ones((1, beta), dtype=np.int64))
    cols = np.kron(np.eye(n, dtype=np.int64), np.ones((alpha, 1), dtype=np.int64))
    return rows @ cols, beta


@dataclass(frozen=True)
class Projector:
    """Projection matrix from ``R^src_dim`` to ``R^dst_dim``.

    The matrix is row-stochastic and non-negative. It maps a vector to the
    point of the target space nearest to it in the cross-dimensional
    distance.
    """

    src_dim: int
    dst_dim: int
    matrix: np.ndarray = field(repr=False)
    _counts: np.ndarray = field(repr=False, compare=False)
    _denominator: int = field(repr=False, compare=False)

    @cached_property
    def exact(self) -> np.ndarray:
        """The same matrix as an object array of :class:`Fraction`."""
        d = self._denominator
        out = np.empty(self._counts.shape, dtype=object)
        for idx, c in np.ndenumerate(self._counts):
            out[idx] = Fraction(int(c), d)
        return out

    def __call__(self, x) -> np.ndarray:
        x = as_vector(x)
        if x.size != self.src_dim:
            raise ValueError(
                f"projector expects dimension {self.src_dim}, got {x.size}")
        if _is_exact(x):
            return self.exact @ x.astype(object)
        return self.matrix @ x

    def to_csv(self) -> str:
        """Matrix rows as comma-separated full-precision floats."""
        return "".join(",".join(repr(float(v)) for v in row) + "\n"
                       for row in self.matrix)


@lru_cache(maxsize=256)
def build_projector(n: int, m: int) -> Projector:
    """Build the projector from dimension ``n`` to dimension ``m``.

    With ``t = lcm(n, m)``, ``a = t/n`` and ``b = t/m`` the matrix is
    ``(1/b) (I_m ⊗ 1_b^T)(I_n ⊗ 1_a)``.

    Examples
    --------
    >>> build_projector(3, 2).matrix * 3
    array([[2., 1., 0.],
           [0., 1., 2.]])
    """
    if n < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    counts, beta = _overlap_counts(n, m)
    counts.setflags(write=False)
    matrix = counts / beta
    matrix.setflags(write=False)
    return Projector(n, m, matrix, counts, beta)


def projector_matrix(n: int, m: int) -> np.ndarray:
    """Float matrix of :func:`build_projector`."""
    return build_projector(n, m).matrix


def exact_projector(n: int, m: int) -> np.ndarray:
    """Rational matrix of :func:`build_projector`."""
    return build_projector(n, m).exact


def project(x, m: int) -> np.ndarray:
    """Project a vector of any dimension onto ``R^m``."""
    x = as_vector(x)
    return build_projector(x.size, m)(x)


def project_class(a: EquivClass, m: int) -> np.ndarray:
    """Project a class onto ``R^m`` through its smallest representative."""
    return project(a.rep, m)
