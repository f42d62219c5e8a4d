"""Arithmetic and equivalence on the union of all Euclidean spaces.

Vectors are plain one-dimensional numpy arrays; their length is their
dimension. Integer arrays and object arrays of :class:`fractions.Fraction`
are treated as exact and compared without tolerance. Everything else is
converted to ``float64`` and compared with a relative tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, NotEquivalent

__all__ = [
    "DEFAULT_TOL", "EquivClass", "as_vector", "ones", "kron", "stp",
    "vplus", "vminus", "inner", "norm", "distance", "equivalent", "reduce",
    "lift", "gcd_vec", "lcm_vec", "class_add", "class_scale", "class_sub",
    "parse_vector", "format_vector", "divisors",
]

#: Relative tolerance used when comparing floating-point vectors.
DEFAULT_TOL = 1e-9


def as_vector(x) -> np.ndarray:
    """Return ``x`` as a non-empty one-dimensional array.

    Integer and Fraction inputs keep an exact dtype; anything else becomes
    ``float64``.
    """
    if isinstance(x, EquivClass):
        return x.rep
    arr = np.asarray(x)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatch("vectors must have dimension >= 1")
    if arr.dtype == object:
        if all(isinstance(v, (int, Fraction)) for v in arr):
            return arr
        return arr.astype(float)
    if np.issubdtype(arr.dtype, np.integer) or arr.dtype == bool:
        return arr.astype(np.int64)
    return arr.astype(float)


def _is_exact(x: np.ndarray) -> bool:
    return x.dtype == object or np.issubdtype(x.dtype, np.integer)


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(int(v))


def _tolerance(tol, *arrays) -> float:
    if all(_is_exact(a) for a in arrays):
        return 0.0
    return DEFAULT_TOL if tol is None else float(tol)


def divisors(n: int) -> list[int]:
    """Divisors of ``n`` in increasing order."""
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def ones(n: int) -> np.ndarray:
    """The all-ones vector of dimension ``n``."""
    return np.ones(n)


def lift(x, k: int) -> np.ndarray:
    """Replicate every entry of ``x`` ``k`` times, i.e. ``x ⊗ 1_k``."""
    if k < 1:
        raise ValueError("lift factor must be >= 1")
    return np.repeat(as_vector(x), k)


def _common(x, y):
    x, y = as_vector(x), as_vector(y)
    t = math.lcm(x.size, y.size)
    return lift(x, t // x.size), lift(y, t // y.size), t


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(np.atleast_2d(a), np.atleast_2d(b))


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 1:
        return a.reshape(-1, 1)
    if a.ndim == 0:
        return a.reshape(1, 1)
    return a


def stp(a, b) -> np.ndarray:
    """Left semi-tensor product of two matrices.

    With ``t = lcm(cols(a), rows(b))`` this is
    ``(a ⊗ I_{t/cols(a)}) @ (b ⊗ I_{t/rows(b)})``. One-dimensional inputs
    are read as column vectors.
    """
    a, b = _as_matrix(a), _as_matrix(b)
    n, p = a.shape[1], b.shape[0]
    if n == p:
        return a @ b
    t = math.lcm(n, p)
    return np.kron(a, np.eye(t // n)) @ np.kron(b, np.eye(t // p))


def vplus(x, y) -> np.ndarray:
    """Cross-dimensional sum; the result lives in dimension ``lcm``."""
    xa, ya, _ = _common(x, y)
    return xa + ya


def vminus(x, y) -> np.ndarray:
    """Cross-dimensional difference ``x ⊞ (-y)``."""
    xa, ya, _ = _common(x, y)
    return xa - ya


def inner(x, y):
    """Normalised inner product of vectors of any dimensions.

    Equals ``<x ⊗ 1_a, y ⊗ 1_b> / t`` with ``t = lcm`` of the two dimensions.
    Exact inputs give a :class:`~fractions.Fraction`.
    """
    xa, ya, t = _common(x, y)
    if _is_exact(xa) and _is_exact(ya):
        return sum((_frac(p) * _frac(q) for p, q in zip(xa, ya)), Fraction(0)) / t
    return float(np.dot(xa, ya)) / t


def norm(x) -> float:
    """Norm induced by :func:`inner`: Euclidean norm over ``sqrt(dim)``."""
    x = as_vector(x)
    return math.sqrt(float(inner(x, x)))


def distance(x, y) -> float:
    """Pseudo-distance ``norm(x ⊖ y)``; zero exactly on equivalent pairs."""
    return norm(vminus(x, y))


def equivalent(x, y, tol: float | None = None) -> bool:
    """Whether ``x ⊗ 1_a == y ⊗ 1_b`` at the common dimension.

    Floating-point inputs are compared with relative tolerance ``tol``
    (default :data:`DEFAULT_TOL`); exact inputs are compared exactly.
    """
    xa, ya, _ = _common(x, y)
    tol = _tolerance(tol, xa, ya)
    if tol == 0.0:
        return bool(np.all(xa == ya))
    diff = np.abs(xa.astype(float) - ya.astype(float))
    scale = max(np.abs(xa).max(), np.abs(ya).max())
    return bool(diff.max() <= tol * scale)


@dataclass(frozen=True, eq=False)
class EquivClass:
    """A point of the quotient space, stored as its smallest representative.

    Build instances through :func:`reduce`; the constructor does not check
    that ``rep`` is irreducible.
    """

    rep: np.ndarray

    def __post_init__(self):
        rep = as_vector(self.rep).copy()
        rep.setflags(write=False)
        object.__setattr__(self, "rep", rep)

    @property
    def dim(self) -> int:
        return self.rep.size

    def __eq__(self, other):
        if not isinstance(other, EquivClass):
            return NotImplemented
        return self.dim == other.dim and bool(np.all(self.rep == other.rep))

    def __hash__(self):
        return hash((self.dim, tuple(self.rep.tolist())))

    def __repr__(self):
        return f"EquivClass(rep={self.rep.tolist()!r})"


def _collapse(x: np.ndarray, k: int) -> np.ndarray:
    """Collapse consecutive blocks of length ``k`` into one entry each."""
    blocks = x.reshape(-1, k)
    if np.all(blocks == blocks[:, :1]):
        return blocks[:, 0].copy()
    return blocks.mean(axis=1)


def _blocks_constant(x: np.ndarray, k: int, atol: float) -> bool:
    blocks = x.reshape(-1, k)
    if atol == 0.0:
        return bool(np.all(blocks == blocks[:, :1]))
    spread = np.abs(blocks - blocks.mean(axis=1, keepdims=True))
    return bool(spread.max() <= atol)


def reduce(x, tol: float | None = None) -> EquivClass:
    """Return the class of ``x`` with its smallest representative.

    Divisors of the dimension are scanned from the largest block length
    down; the first block length at which every block is constant (within
    ``tol`` relative to ``max|x|``) wins. The zero vector reduces to the
    one-dimensional zero.
    """
    x = as_vector(x)
    tol = _tolerance(tol, x)
    scale = float(np.abs(x).max())
    if scale == 0.0:
        return EquivClass(x[:1] * 0)
    xf = x if tol == 0.0 else x.astype(float)
    for k in reversed(divisors(x.size)[1:]):
        if _blocks_constant(xf, k, tol * scale):
            return EquivClass(_collapse(x, k))
    return EquivClass(x)


def gcd_vec(x, y, tol: float | None = None) -> np.ndarray:
    """Largest common divisor vector of two equivalent vectors.

    Returns ``g`` of dimension ``gcd(dim x, dim y)`` with ``x = g ⊗ 1_b`` and
    ``y = g ⊗ 1_a``.

    Raises
    ------
    NotEquivalent
        If ``x`` and ``y`` lie in different classes.
    """
    x, y = as_vector(x), as_vector(y)
    if not equivalent(x, y, tol):
        raise NotEquivalent("gcd_vec needs equivalent vectors")
    g = math.gcd(x.size, y.size)
    return _collapse(x, x.size // g)


def lcm_vec(x, y, tol: float | None = None) -> np.ndarray:
    """Smallest common multiple vector of two equivalent vectors.

    Raises
    ------
    NotEquivalent
        If ``x`` and ``y`` lie in different classes.
    """
    x, y = as_vector(x), as_vector(y)
    if not equivalent(x, y, tol):
        raise NotEquivalent("lcm_vec needs equivalent vectors")
    return lift(x, math.lcm(x.size, y.size) // x.size)


def class_add(a: EquivClass, b: EquivClass, tol: float | None = None) -> EquivClass:
    """Sum of two classes."""
    return reduce(vplus(a.rep, b.rep), tol)


def class_sub(a: EquivClass, b: EquivClass, tol: float | None = None) -> EquivClass:
    """Difference of two classes."""
    return reduce(vminus(a.rep, b.rep), tol)


def class_scale(a: EquivClass, r, tol: float | None = None) -> EquivClass:
    """Scalar multiple of a class."""
    return reduce(r * a.rep, tol)


def parse_vector(text: str) -> np.ndarray:
    """Parse a vector literal such as ``"[1, 0, -1]"``.

    Raises
    ------
    ValueError
        If the text is not a non-empty bracketed list of numbers.
    """
    try:
        values = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"bad vector literal {text!r}: {exc.msg}") from None
    if not isinstance(values, list) or not values or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ValueError(f"bad vector literal {text!r}: expected [n1, n2, ...]")
    return np.asarray(values, dtype=float)


def format_vector(x, digits: int = 4) -> str:
    """Space-separated fixed-point rendering used by the CLI."""
    return " ".join(f"{round(float(v), digits) + 0.0:.{digits}f}" for v in as_vector(x))
