"""Linear (control) systems across dimensions.

Least-squares projection of fixed- and varying-dimension linear systems,
lifting of linear vector fields and linear functions, matrix exponentials,
controllability/observability and minimum-energy steering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad_vec

from .errors import DimensionMismatch, ScheduleMismatch, SingularFactor, UncontrollablePair
from .projector import projector_matrix

__all__ = [
    "LinearSystem", "Stage", "VaryingLinearSystem", "project_A", "project_B",
    "project_C", "project_system", "project_varying", "right_factor",
    "lift_linear_vf", "lift_linear_function", "matrix_exp", "ctrb", "obsv",
    "rank", "gramian", "MinEnergyControl", "min_energy_control",
    "omega_linear_system", "simulate_discrete",
]


def _matrix(a, name: str) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1) if name == "C" else a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix")
    return a


@dataclass(frozen=True)
class LinearSystem:
    """State-space system ``x' = A x + B u``, ``y = C x``.

    For a stage of a varying system ``A`` may be rectangular: it maps the
    current state dimension (columns) to the next one (rows).
    """

    A: np.ndarray
    B: np.ndarray | None = None
    C: np.ndarray | None = None
    kind: str = "continuous"

    def __post_init__(self):
        A = _matrix(self.A, "A")
        object.__setattr__(self, "A", A)
        if self.B is not None:
            B = _matrix(self.B, "B")
            if B.shape[0] != A.shape[0]:
                raise DimensionMismatch(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
            object.__setattr__(self, "B", B)
        if self.C is not None:
            C = _matrix(self.C, "C")
            if C.shape[1] != A.shape[1]:
                raise DimensionMismatch(f"C has {C.shape[1]} columns, A has {A.shape[1]}")
            object.__setattr__(self, "C", C)
        if self.kind not in ("continuous", "discrete"):
            raise ValueError(f"kind must be 'continuous' or 'discrete', not {self.kind!r}")

    @property
    def state_dim(self) -> int:
        return self.A.shape[1]

    @property
    def input_dim(self) -> int:
        return 0 if self.B is None else self.B.shape[1]

    @property
    def output_dim(self) -> int:
        return 0 if self.C is None else self.C.shape[0]


@dataclass(frozen=True)
class Stage:
    """One entry of a schedule: a rule for when it applies and its system.

    ``when`` is ``"even"``, ``"odd"``, ``"always"`` or a half-open
    interval ``(t0, t1)``.
    """

    when: str | tuple[float, float]
    system: LinearSystem

    def applies(self, t: float) -> bool:
        if self.when == "always":
            return True
        if self.when == "even":
            return int(t) % 2 == 0
        if self.when == "odd":
            return int(t) % 2 == 1
        t0, t1 = self.when
        return t0 <= t < t1


@dataclass(frozen=True)
class VaryingLinearSystem:
    """Piecewise-constant-dimension linear system given by a schedule.

    Parity schedules are cyclic, so the last stage must chain into the
    first one as well.

    Raises
    ------
    ScheduleMismatch
        If ``cols(A_next) != rows(A_prev)`` for consecutive stages.
    """

    stages: tuple[Stage, ...]

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages:
            raise ScheduleMismatch("a schedule needs at least one stage")
        cyclic = all(s.when in ("even", "odd", "always") for s in stages)
        pairs = list(zip(stages, stages[1:]))
        if cyclic:
            pairs.append((stages[-1], stages[0]))
        for prev, nxt in pairs:
            if nxt.system.A.shape[1] != prev.system.A.shape[0]:
                raise ScheduleMismatch(
                    f"stage {prev.when!r} ends in R^{prev.system.A.shape[0]} but "
                    f"stage {nxt.when!r} starts in R^{nxt.system.A.shape[1]}")

    def stage_at(self, t: float) -> Stage:
        for s in self.stages:
            if s.applies(t):
                return s
        raise ScheduleMismatch(f"no stage covers t={t}")


def _factor(P: np.ndarray, wide: bool) -> np.ndarray:
    """``P^T (P P^T)^-1`` if ``wide`` else ``(P^T P)^-1 P^T``, by LU solves."""
    rows, cols = P.shape
    if (wide and cols < rows) or (not wide and cols > rows):
        raise SingularFactor(f"projector {rows}x{cols} has no such pseudo-inverse factor")
    try:
        if wide:
            return np.linalg.solve(P @ P.T, P).T
        return np.linalg.solve(P.T @ P, P.T)
    except np.linalg.LinAlgError as exc:
        raise SingularFactor(str(exc)) from None


def right_factor(n: int, m: int, P: np.ndarray | None = None) -> np.ndarray:
    """Least-squares right inverse used when projecting from ``R^n`` to ``R^m``.

    Returns ``P^T (P P^T)^-1`` when ``n >= m`` and ``(P^T P)^-1 P^T``
    otherwise, with ``P`` the projector (or a supplied ``m x n`` matrix).
    """
    P = projector_matrix(n, m) if P is None else np.asarray(P, dtype=float)
    return _factor(P, n >= m)


def project_A(A, m: int, P=None) -> np.ndarray:
    """Least-squares projection of a square ``A`` on ``R^n`` to ``R^m``.

    Solves ``min ||P A - A_p P||_F`` with ``P`` the projector ``R^n -> R^m``:
    ``P A P^T (P P^T)^-1`` for ``n >= m`` and ``P A (P^T P)^-1 P^T``
    otherwise.

    Examples
    --------
    >>> project_A(2 * np.eye(5), 3)
    array([[2., 0., 0.],
           [0., 2., 0.],
           [0., 0., 2.]])
    """
    A = _matrix(A, "A")
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionMismatch("project_A needs a square matrix")
    if n == m and P is None:
        return A.copy()
    P = projector_matrix(n, m) if P is None else np.asarray(P, dtype=float)
    return P @ A @ right_factor(n, m, P)


def project_B(B, m: int, P=None) -> np.ndarray:
    """Projection of an input matrix: ``P B``."""
    B = _matrix(B, "B")
    P = projector_matrix(B.shape[0], m) if P is None else np.asarray(P, dtype=float)
    return P @ B


def project_C(C, n: int, m: int, P=None) -> np.ndarray:
    """Least-squares projection of an output matrix from ``R^n`` to ``R^m``.

    The branch is chosen by comparing ``n`` with the output dimension
    ``p = rows(C)``: ``C P^T (P P^T)^-1`` when ``n >= p``, else
    ``C (P^T P)^-1 P^T``. The first factor exists only for ``n >= m`` and
    the second only for ``n <= m``; :class:`SingularFactor` is raised when
    the branch picks one that does not exist.
    """
    C = _matrix(C, "C")
    if C.shape[1] != n:
        raise DimensionMismatch(f"C has {C.shape[1]} columns, expected {n}")
    if n == m and P is None:
        return C.copy()
    P = projector_matrix(n, m) if P is None else np.asarray(P, dtype=float)
    return C @ _factor(P, n >= C.shape[0])


def project_system(sys: LinearSystem, m: int) -> LinearSystem:
    """Project a dimension-invariant system to ``R^m``."""
    n = sys.state_dim
    return LinearSystem(
        project_A(sys.A, m),
        None if sys.B is None else project_B(sys.B, m),
        None if sys.C is None else project_C(sys.C, n, m),
        sys.kind,
    )


def project_varying(sys: VaryingLinearSystem, m: int,
                    projectors: dict[tuple[int, int], np.ndarray] | None = None
                    ) -> list[LinearSystem]:
    """Project every stage of a varying system to the fixed dimension ``m``.

    For a stage mapping ``R^n`` to ``R^n'``:
    ``A_p = P' A R``, ``B_p = P' B`` and ``C_p = C R`` with ``P'`` the
    projector from ``R^n'``, ``R`` the right factor of the projector from
    ``R^n`` (see :func:`right_factor`; the output map uses the branch of
    :func:`project_C`).

    ``projectors`` optionally replaces the projector for a given
    ``(n, m)`` pair, e.g. to reproduce a published computation that used
    differently scaled matrices.
    """
    projectors = projectors or {}

    def P(n):
        return np.asarray(projectors.get((n, m), projector_matrix(n, m)), dtype=float)

    out = []
    for stage in sys.stages:
        s = stage.system
        n_next, n = s.A.shape
        A_p = P(n_next) @ s.A @ right_factor(n, m, P(n))
        B_p = None if s.B is None else P(n_next) @ s.B
        C_p = None if s.C is None else project_C(s.C, n, m, P(n))
        out.append(LinearSystem(A_p, B_p, C_p, s.kind))
    return out


def simulate_discrete(sys: VaryingLinearSystem, x0, steps: int,
                      inputs: Sequence | None = None) -> list[np.ndarray]:
    """Iterate ``x(t+1) = A(t) x(t) + B(t) u(t)`` over a schedule.

    Returns the states ``x(0) … x(steps)``; dimensions follow the schedule.
    """
    x = np.asarray(x0, dtype=float)
    states = [x]
    for t in range(steps):
        s = sys.stage_at(t).system
        x = s.A @ x
        if inputs is not None and s.B is not None:
            x = x + s.B @ np.atleast_1d(inputs[t])
        states.append(x)
    return states


def lift_linear_vf(A, k: int) -> np.ndarray:
    """Matrix of the linear field ``Ax`` lifted to ``R^(km)``.

    ``A_k = (1/k)(I_m ⊗ 1_k) A (I_m ⊗ 1_k^T)``, so that
    ``A_k (x ⊗ 1_k) = (A x) ⊗ 1_k``.
    """
    A = _matrix(A, "A")
    if k == 1:
        return A.copy()
    m = A.shape[0]
    up = np.kron(np.eye(m), np.ones((k, 1)))
    return up @ A @ up.T / k


def lift_linear_function(c, s: int) -> np.ndarray:
    """Row ``c`` of a linear function on ``R^m`` carried to ``R^s``.

    With ``p = lcm(m, s) = mu m = r s`` this is
    ``(1/mu) c (I_m ⊗ 1_mu^T)(I_s ⊗ 1_r)``.
    """
    c = np.asarray(c, dtype=float).ravel()
    m = c.size
    if s == m:
        return c.copy()
    p = math.lcm(m, s)
    mu, r = p // m, p // s
    return c @ np.kron(np.eye(m), np.ones((1, mu))) @ np.kron(np.eye(s), np.ones((r, 1))) / mu


def matrix_exp(A, t: float = 1.0) -> np.ndarray:
    """``exp(A t)`` by scaling and squaring of a truncated Taylor series.

    The matrix is scaled by ``2**-j`` until its 1-norm is at most 1/2, the
    series is summed to degree 18 (truncation error below ``1e-19``
    relative) and the result squared ``j`` times.
    """
    M = _matrix(A, "A") * t
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatch("matrix_exp needs a square matrix")
    nrm = np.abs(M).sum(axis=0).max()
    j = max(0, int(math.ceil(math.log2(nrm / 0.5)))) if nrm > 0.5 else 0
    M = M / 2.0 ** j
    term = np.eye(n)
    out = np.eye(n)
    for i in range(1, 19):
        term = term @ M / i
        out = out + term
    for _ in range(j):
        out = out @ out
    return out


def ctrb(A, B) -> np.ndarray:
    """Controllability matrix ``[B, AB, …, A^(n-1) B]``."""
    A, B = _matrix(A, "A"), _matrix(B, "B")
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def obsv(A, C) -> np.ndarray:
    """Observability matrix ``[C; CA; …; C A^(n-1)]``."""
    A, C = _matrix(A, "A"), _matrix(C, "C")
    blocks = [C]
    for _ in range(A.shape[0] - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def rank(M) -> int:
    """Numerical rank: singular values above ``max(shape) * eps * s_max``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    return int(np.linalg.matrix_rank(M))


def _nilpotency_index(A: np.ndarray, limit: int = 3) -> int | None:
    P = np.eye(A.shape[0])
    for i in range(1, limit + 1):
        P = P @ A
        if not P.any():
            return i
    return None


def gramian(A, B, T: float, method: str = "auto") -> np.ndarray:
    """Controllability Gramian ``∫_0^T e^{-As} B B^T e^{-A^T s} ds``.

    ``method`` is ``"closed"`` (nilpotent ``A`` of index at most 3),
    ``"quadrature"`` (adaptive Gauss-Kronrod, relative tolerance 1e-10) or
    ``"auto"``, which picks the closed form when available.
    """
    A, B = _matrix(A, "A"), _matrix(B, "B")
    index = _nilpotency_index(A)
    if method == "closed" or (method == "auto" and index is not None):
        if index is None:
            raise ValueError("closed-form Gramian needs A nilpotent of index <= 3")
        # e^{-As} = sum_i (-A)^i s^i / i!, integrate term by term
        powers = [np.linalg.matrix_power(-A, i) @ B / math.factorial(i)
                  for i in range(index)]
        W = np.zeros((A.shape[0], A.shape[0]))
        for i, Pi in enumerate(powers):
            for j, Pj in enumerate(powers):
                W += Pi @ Pj.T * T ** (i + j + 1) / (i + j + 1)
        return W

    def integrand(s):
        E = matrix_exp(-A, s) @ B
        return E @ E.T

    W, _ = quad_vec(integrand, 0.0, T, epsrel=1e-10, epsabs=1e-14)
    return W


@dataclass(frozen=True)
class MinEnergyControl:
    """Open-loop control steering ``x0`` to ``xT`` over ``[0, T]``.

    ``u(t) = -B^T e^{-A^T t} eta`` with ``eta = W^-1 (x0 - e^{-AT} xT)``.
    """

    A: np.ndarray
    B: np.ndarray
    x0: np.ndarray
    xT: np.ndarray
    T: float
    gramian: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)

    def __call__(self, t: float) -> np.ndarray:
        return -self.B.T @ matrix_exp(-self.A.T, t) @ self.eta

    def coefficients(self) -> np.ndarray:
        """Polynomial coefficients of ``u`` (rows: powers of ``t``), nilpotent ``A`` only."""
        index = _nilpotency_index(self.A, self.A.shape[0])
        if index is None:
            raise ValueError("u is a polynomial only for nilpotent A")
        P = np.eye(self.A.shape[0])
        rows = []
        for i in range(index):
            rows.append(-self.B.T @ P @ self.eta / math.factorial(i))
            P = P @ -self.A.T
        return np.array(rows)

    def report(self, digits: int = 6) -> str:
        g = "; ".join(" ".join(f"{v:.{digits}g}" for v in row) for row in self.gramian)
        return f"gramian=[{g}]\ncondition={np.linalg.cond(self.gramian):.{digits}g}"


def min_energy_control(A, B, x0, xT, T: float, cond_limit: float = 1e12) -> MinEnergyControl:
    """Minimum-energy control from ``x0`` at time 0 to ``xT`` at time ``T``.

    Raises
    ------
    UncontrollablePair
        If the Gramian's condition number exceeds ``cond_limit``.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    A, B = _matrix(A, "A"), _matrix(B, "B")
    x0 = np.asarray(x0, dtype=float).ravel()
    xT = np.asarray(xT, dtype=float).ravel()
    W = gramian(A, B, T)
    if not np.isfinite(W).all() or np.linalg.cond(W) > cond_limit:
        raise UncontrollablePair("controllability Gramian is singular")
    eta = np.linalg.solve(W, x0 - matrix_exp(-A, T) @ xT)
    return MinEnergyControl(A, B, x0, xT, float(T), W, eta)


def omega_linear_system(A, g: Sequence = (), h: Sequence = ()) -> tuple[LinearSystem, int]:
    """Realize a linear control system whose generators live in different dimensions.

    ``A`` generates the drift ``x -> A x`` on ``R^m``; each column in ``g``
    and each row in ``h`` may have its own dimension. Everything is lifted
    to the smallest common dimension ``q`` and returned with it.
    """
    A = _matrix(A, "A")
    g = [np.asarray(v, dtype=float).ravel() for v in g]
    h = [np.asarray(c, dtype=float).ravel() for c in h]
    q = math.lcm(A.shape[0], *(v.size for v in g), *(c.size for c in h))
    Aq = lift_linear_vf(A, q // A.shape[0])
    B = np.column_stack([np.repeat(v, q // v.size) for v in g]) if g else None
    C = np.vstack([lift_linear_function(c, q) for c in h]) if h else None
    return LinearSystem(Aq, B, C), q
