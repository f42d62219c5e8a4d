"""Simulation of dimension-varying dynamical systems.

A system is given by a vector-field generator on some ``R^m``. It can be
realized on any ``R^n`` (exactly when ``m`` divides ``n``) and integrated
with a fixed-step RK4 scheme. Every sample is also reduced to its
equivalence class, so a trajectory can be compared across dimensions.

Three transitions between systems are supported:

* :func:`switch` hands the state of one system to another at a fixed time,
* :func:`dock` merges two systems into one through a blended transient,
* :func:`undock` splits one system into two the same way.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import MatchFailure, NonFiniteState, ScheduleError
from .esdd import EquivClass, distance, equivalent, lift, reduce
from .fieldlang import EvalError, parse, parse_vector_exprs
from .fields import ScalarFieldGen, VectorFieldGen, realize_field
from .projector import projector_matrix

__all__ = [
    "OmegaSystem", "Realization", "Trajectory", "Blend", "VirtualForce",
    "DockingScenario", "realize", "rk4_step", "simulate", "switch", "dock",
    "undock", "transient_rhs",
]

Rhs = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OmegaSystem:
    """A system on the quotient space given by finite-dimensional generators.

    ``input_signal(t)`` supplies the open-loop input when ``F`` has one.
    """

    F: VectorFieldGen
    outputs: tuple[ScalarFieldGen, ...] = ()
    input_signal: Callable[[float], np.ndarray] | None = field(default=None, repr=False)

    @property
    def min_gen_dim(self) -> int:
        return math.lcm(self.F.dim, *(h.dim for h in self.outputs))

    def inputs(self, t: float):
        if self.input_signal is None:
            return None
        return np.atleast_1d(np.asarray(self.input_signal(t), dtype=float))

    def with_input(self, signal: Callable[[float], np.ndarray]) -> "OmegaSystem":
        return OmegaSystem(self.F, self.outputs, signal)


@dataclass(frozen=True)
class Realization:
    """An ordinary differential equation on ``R^dim``."""

    dim: int
    exact: bool
    rhs: Rhs = field(repr=False)


def realize(sys: OmegaSystem, n: int) -> Realization:
    """Realize ``sys`` on ``R^n``.

    The result is exact when ``n`` is a multiple of ``sys.min_gen_dim``;
    otherwise it is the least-squares approximation.
    """
    F = realize_field(sys.F, n)
    return Realization(n, n % sys.min_gen_dim == 0,
                       lambda t, y: F(y, sys.inputs(t), t))


def rk4_step(f: Rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step."""
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _grid(t0: float, t1: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    n = max(1, round((t1 - t0) / dt)) if t1 > t0 else 0
    return t0 + (t1 - t0) * np.arange(n + 1) / max(n, 1)


def _integrate(f: Rhs, y0: np.ndarray, times: np.ndarray) -> list[np.ndarray]:
    y = np.asarray(y0, dtype=float)
    if not np.isfinite(y).all():
        raise NonFiniteState(times[0], "non-finite initial state")
    out = [y]
    for t_prev, t_next in zip(times[:-1], times[1:]):
        try:
            with np.errstate(all="ignore"):
                y = rk4_step(f, float(t_prev), y, float(t_next - t_prev))
        except EvalError as exc:
            raise NonFiniteState(t_prev, f"{exc} (last good t={float(t_prev):.6g})") from exc
        if not np.isfinite(y).all():
            raise NonFiniteState(t_prev)
        out.append(y)
    return out


@dataclass(frozen=True)
class Trajectory:
    """Samples of a (possibly dimension-varying) trajectory.

    ``states`` holds the realized vectors; :attr:`classes` the reduced
    equivalence classes. ``events`` records transitions as
    ``(time, label, jump)`` where ``jump`` is the distance between the
    states on either side.
    """

    times: np.ndarray
    states: tuple[np.ndarray, ...]
    tol: float | None = None
    events: tuple[tuple[float, str, float], ...] = ()

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if len(times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return len(self.times)

    @property
    def realized_dims(self) -> list[int]:
        return [s.size for s in self.states]

    @cached_property
    def classes(self) -> tuple[EquivClass, ...]:
        return tuple(reduce(s, self.tol) for s in self.states)

    @property
    def samples(self) -> list[tuple[float, EquivClass, int]]:
        return [(float(t), c, s.size)
                for t, c, s in zip(self.times, self.classes, self.states)]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def step_distances(self) -> np.ndarray:
        """Distance between consecutive samples."""
        return np.array([distance(a, b) for a, b in zip(self.states, self.states[1:])])

    def max_step_distance(self) -> float:
        return float(self.step_distances().max()) if len(self) > 1 else 0.0

    def to_csv(self, stream=None) -> str | None:
        """Write ``t,dim,x1..xD`` rows at full precision.

        Rows shorter than the widest state leave trailing columns empty.
        Returns the text when ``stream`` is None.
        """
        own = stream is None
        stream = io.StringIO() if own else stream
        width = max(self.realized_dims)
        stream.write(",".join(["t", "dim", *(f"x{i + 1}" for i in range(width))]) + "\n")
        for t, s in zip(self.times, self.states):
            cells = [repr(float(t)), str(s.size), *(repr(float(v)) for v in s)]
            cells += [""] * (width - s.size)
            stream.write(",".join(cells) + "\n")
        return stream.getvalue() if own else None


def _join(segments: Sequence[tuple[np.ndarray, list[np.ndarray]]], tol,
          events=()) -> Trajectory:
    """Concatenate segments that share their boundary times.

    The boundary sample of the earlier segment is kept.
    """
    times, states = list(segments[0][0]), list(segments[0][1])
    for seg_times, seg_states in segments[1:]:
        times.extend(seg_times[1:])
        states.extend(seg_states[1:])
    return Trajectory(np.array(times), tuple(states), tol, tuple(events))


def simulate(rhs: Rhs | Realization, x0, t0: float, t1: float, dt: float,
             tol: float | None = None) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``x0`` with fixed-step RK4.

    The step is adjusted so that a whole number of steps spans ``[t0, t1]``.

    Raises
    ------
    NonFiniteState
        If the state becomes non-finite or an expression fails to evaluate;
        carries the last good time.
    """
    f = rhs.rhs if isinstance(rhs, Realization) else rhs
    x0 = np.asarray(x0, dtype=float).ravel()
    if isinstance(rhs, Realization) and x0.size != rhs.dim:
        raise ValueError(f"initial state has dimension {x0.size}, realization {rhs.dim}")
    times = _grid(t0, t1, dt)
    return Trajectory(times, tuple(_integrate(f, x0, times)), tol)


def _leaf(sys: OmegaSystem, x0: np.ndarray) -> tuple[int, np.ndarray]:
    """Smallest exact leaf holding both the generator and ``x0``; ``x0`` lifted there."""
    n = math.lcm(sys.min_gen_dim, x0.size)
    return n, lift(x0, n // x0.size)


def switch(sys1: OmegaSystem, sys2: OmegaSystem, x0, T: float, t0: float,
           t1: float, dt: float, *, n2: int | None = None, zT=None,
           steering=None, tol: float | None = None) -> Trajectory:
    """Run ``sys1`` until ``T``, then continue with ``sys2``.

    Parameters
    ----------
    n2 : int, optional
        Dimension on which ``sys2`` runs; defaults to its generator
        dimension.
    zT : array_like, optional
        Required initial state of ``sys2``. When omitted it is the lift of
        the class reached at ``T`` to ``R^n2``.
    steering : callable, optional
        Input signal for ``sys1`` replacing its own, evaluated at ``t - t0``;
        typically a :class:`~dimfree.linear.MinEnergyControl`.

    Raises
    ------
    MatchFailure
        If the state reached at ``T`` is not equivalent to ``zT``, or its
        class cannot be realized on ``R^n2``.
    """
    if not t0 < T < t1:
        raise ScheduleError("switch time must lie strictly inside (t0, t1)")
    x0 = np.asarray(x0, dtype=float).ravel()
    if steering is not None:
        sys1 = sys1.with_input(lambda t: steering(t - t0))
    n1, x0 = _leaf(sys1, x0)
    times1 = _grid(t0, T, dt)
    seg1 = _integrate(realize(sys1, n1).rhs, x0, times1)
    xT = seg1[-1]
    n2 = sys2.min_gen_dim if n2 is None else n2
    if zT is None:
        c = reduce(xT, tol)
        if n2 % c.dim:
            raise MatchFailure(
                f"state at T={T:.6g} has dimension {c.dim}, not realizable on R^{n2}")
        zT = lift(c.rep, n2 // c.dim)
    zT = np.asarray(zT, dtype=float).ravel()
    if zT.size != n2:
        raise MatchFailure(f"handover state has dimension {zT.size}, expected {n2}")
    if not equivalent(xT, zT, tol):
        raise MatchFailure(
            f"states differ at T={T:.6g}: distance {distance(xT, zT):.6g}")
    jump = distance(xT, zT)
    times2 = _grid(T, t1, dt)
    seg2 = _integrate(realize(sys2, n2).rhs, zT, times2)
    return _join([(times1, seg1), (times2, seg2)], tol,
                 [(float(T), "switch", jump)])


# --------------------------------------------------------------- transients

def _smoothstep(s: float) -> float:
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True)
class Blend:
    """Blend schedule ``lambda(s)`` on the normalised window time ``s``.

    ``kind`` is ``"smoothstep"`` (``3s^2 - 2s^3``), ``"linear"`` or
    ``"expr"``, in which case ``expr`` is an expression in ``t`` read as
    the normalised time.
    """

    kind: str = "smoothstep"
    expr: str | None = None

    def __post_init__(self):
        if self.kind not in ("smoothstep", "linear", "expr"):
            raise ScheduleError(f"unknown blend {self.kind!r}")
        if self.kind == "expr":
            object.__setattr__(self, "_compiled", parse(self.expr or "", 0, 0))

    @classmethod
    def from_spec(cls, spec: str) -> "Blend":
        if spec in ("smoothstep", "linear"):
            return cls(spec)
        return cls("expr", spec)

    def __call__(self, s: float) -> float:
        if self.kind == "smoothstep":
            return _smoothstep(s)
        if self.kind == "linear":
            return s
        return self._compiled.evaluate((), None, s)

    def validate(self, samples: int = 101) -> None:
        """Check ``lambda(0) = 0``, ``lambda(1) = 1`` and monotonicity."""
        values = [self(i / (samples - 1)) for i in range(samples)]
        if abs(values[0]) > 1e-12 or abs(values[-1] - 1.0) > 1e-12:
            raise ScheduleError("blend must run from 0 to 1 over the window")
        if any(b < a - 1e-12 for a, b in zip(values, values[1:])):
            raise ScheduleError("blend must be non-decreasing")


@dataclass(frozen=True)
class VirtualForce:
    """Interaction term added to the transient dynamics.

    Evaluated as ``psi(xi, ref, t)`` where ``xi`` is the transient state and
    ``ref`` the stacked participants lifted to the same dimension. Kinds:

    * ``"none"``: zero,
    * ``"proportional"``: ``-gain * (xi - ref)``,
    * ``"clutch"``: ``gain * sign(ref - xi)`` entrywise,
    * ``"expr"``: one expression per coordinate with ``x1..`` bound to
      ``xi``, ``u1..`` to ``ref`` and ``t`` to time.

    All kinds vanish when ``xi == ref`` except user expressions, which are
    the caller's responsibility.
    """

    kind: str = "proportional"
    gain: float = 1.0
    exprs: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("none", "proportional", "clutch", "expr"):
            raise ScheduleError(f"unknown virtual force {self.kind!r}")
        if self.kind == "expr" and not self.exprs:
            raise ScheduleError("expression virtual force needs expressions")

    def bind(self, dim: int) -> Callable[[np.ndarray, np.ndarray, float], np.ndarray]:
        """Return the force as a function on ``R^dim``."""
        if self.kind == "none":
            return lambda xi, ref, t: np.zeros(dim)
        if self.kind == "proportional":
            g = self.gain
            return lambda xi, ref, t: -g * (xi - ref)
        if self.kind == "clutch":
            g = self.gain
            return lambda xi, ref, t: g * np.sign(ref - xi)
        if len(self.exprs) != dim:
            raise ScheduleError(
                f"virtual force has {len(self.exprs)} components, transient leaf is R^{dim}")
        vec = parse_vector_exprs(self.exprs, dim, dim)
        return lambda xi, ref, t: vec.evaluate(xi, ref, t)


@dataclass(frozen=True)
class DockingScenario:
    """Two participants, a combined system and the transition between them.

    For ``mode="dock"`` ``sys1`` and ``sys2`` merge into ``target``; for
    ``mode="undock"`` ``target`` splits into ``sys1`` and ``sys2``.

    Raises
    ------
    ScheduleError
        If the window is empty or the blend does not run monotonically from
        0 to 1.
    """

    sys1: OmegaSystem
    sys2: OmegaSystem
    target: OmegaSystem
    window: tuple[float, float]
    blend: Blend = Blend()
    psi: VirtualForce = VirtualForce()
    mode: str = "dock"
    check_blend: bool = True

    def __post_init__(self):
        T0, T1 = self.window
        if not T0 < T1:
            raise ScheduleError("window must satisfy T0 < T1")
        if self.mode not in ("dock", "undock"):
            raise ScheduleError(f"unknown mode {self.mode!r}")
        if self.check_blend:
            self.blend.validate()

    def lam(self, t: float) -> float:
        T0, T1 = self.window
        return self.blend(min(1.0, max(0.0, (t - T0) / (T1 - T0))))


class _Stack:
    """Block-diagonal realization of two participants on ``R^(n1 + n2)``."""

    def __init__(self, sys1: OmegaSystem, n1: int, sys2: OmegaSystem, n2: int):
        self.n1, self.n2 = n1, n2
        self.f1, self.f2 = realize(sys1, n1).rhs, realize(sys2, n2).rhs

    @property
    def dim(self) -> int:
        return self.n1 + self.n2

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        return np.concatenate([self.f1(t, y[:self.n1]), self.f2(t, y[self.n1:])])


class _Transient:
    """Right-hand side of the blended phase on the augmented state ``[ref; xi]``.

    ``ref`` holds the participants on ``R^(n1 + n2)`` and keeps following
    their own dynamics; ``xi`` lives on ``R^L`` with ``L`` a multiple of
    ``n1 + n2``.
    """

    def __init__(self, scenario: DockingScenario, stack: _Stack, L: int):
        self.scenario = scenario
        self.stack = stack
        self.L = L
        self.up = L // stack.dim
        self.combined = realize(scenario.target, L).rhs
        self.psi = scenario.psi.bind(L)

    def xi_rate(self, t: float, ref: np.ndarray, xi: np.ndarray, lam: float) -> np.ndarray:
        stacked = lift(self.stack(t, ref), self.up)
        combined = self.combined(t, xi)
        if self.scenario.mode == "dock":
            blended = (1.0 - lam) * stacked + lam * combined
        else:
            blended = (1.0 - lam) * combined + lam * stacked
        return blended + self.psi(xi, lift(ref, self.up), t)

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        n = self.stack.dim
        ref, xi = y[:n], y[n:]
        lam = self.scenario.lam(t)
        return np.concatenate([self.stack(t, ref), self.xi_rate(t, ref, xi, lam)])


def transient_rhs(scenario: DockingScenario, t: float, ref, xi, lam: float | None = None,
                  leaves: tuple[int, int] | None = None) -> np.ndarray:
    """Rate of the transient state ``xi`` given the stacked participants ``ref``.

    ``lam`` overrides the scheduled blend value (useful for checking the
    blend endpoints). ``leaves`` gives the participants' dimensions and
    defaults to their generator dimensions.
    """
    ref = np.asarray(ref, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n1, n2 = leaves or (scenario.sys1.min_gen_dim, scenario.sys2.min_gen_dim)
    stack = _Stack(scenario.sys1, n1, scenario.sys2, n2)
    tr = _Transient(scenario, stack, xi.size)
    return tr.xi_rate(t, ref, xi, scenario.lam(t) if lam is None else lam)


def _phase_grids(t0, t1, window, dt):
    T0, T1 = window
    if not t0 <= T0 < T1 <= t1:
        raise ScheduleError("window must lie inside [t0, t1]")
    return _grid(t0, T0, dt), _grid(T0, T1, dt), _grid(T1, t1, dt)


def dock(scenario: DockingScenario, x0, z0, t0: float, t1: float, dt: float,
         tol: float | None = None) -> Trajectory:
    """Merge two systems into the combined one over the scenario window.

    Before ``T0`` the participants run side by side; the recorded state is
    their concatenation. Over ``[T0, T1]`` the transient state ``xi``, on
    the smallest leaf holding both the stack and the combined generator,
    follows ``(1 - lam) * stack + lam * combined + psi``. After ``T1`` only
    the combined dynamics act on ``xi``.
    """
    if scenario.mode != "dock":
        raise ScheduleError("dock needs a scenario with mode='dock'")
    n1, x0 = _leaf(scenario.sys1, np.asarray(x0, dtype=float).ravel())
    n2, z0 = _leaf(scenario.sys2, np.asarray(z0, dtype=float).ravel())
    stack = _Stack(scenario.sys1, n1, scenario.sys2, n2)
    L = math.lcm(stack.dim, scenario.target.min_gen_dim)
    g1, g2, g3 = _phase_grids(t0, t1, scenario.window, dt)

    seg1 = _integrate(stack, np.concatenate([x0, z0]), g1)
    ref0 = seg1[-1]
    transient = _Transient(scenario, stack, L)
    aug = _integrate(transient, np.concatenate([ref0, lift(ref0, L // stack.dim)]), g2)
    seg2 = [y[stack.dim:] for y in aug]
    seg3 = _integrate(realize(scenario.target, L).rhs, seg2[-1], g3)
    return _join([(g1, seg1), (g2, seg2), (g3, seg3)], tol,
                 [(float(scenario.window[0]), "dock-start", distance(ref0, seg2[0])),
                  (float(scenario.window[1]), "dock-end", 0.0)])


def undock(scenario: DockingScenario, xi0, t0: float, t1: float, dt: float,
           tol: float | None = None) -> Trajectory:
    """Split the combined system into the two participants over the window.

    The combined system runs until ``T0``. The participants then start from
    the projection of ``xi`` onto ``R^(n1 + n2)`` and ``xi`` follows
    ``(1 - lam) * combined + lam * stack + psi``. After ``T1`` the stacked
    participants' dynamics act on ``xi``, realized on its leaf so that no
    jump occurs.
    """
    if scenario.mode != "undock":
        raise ScheduleError("undock needs a scenario with mode='undock'")
    L0, xi0 = _leaf(scenario.target, np.asarray(xi0, dtype=float).ravel())
    n1, n2 = scenario.sys1.min_gen_dim, scenario.sys2.min_gen_dim
    stack = _Stack(scenario.sys1, n1, scenario.sys2, n2)
    L = math.lcm(L0, stack.dim)
    g1, g2, g3 = _phase_grids(t0, t1, scenario.window, dt)

    seg1 = _integrate(realize(scenario.target, L0).rhs, xi0, g1)
    xi_T0 = lift(seg1[-1], L // L0)
    down = projector_matrix(L, stack.dim)
    ref0 = down @ xi_T0
    transient = _Transient(scenario, stack, L)
    aug = _integrate(transient, np.concatenate([ref0, xi_T0]), g2)
    seg2 = [y[stack.dim:] for y in aug]

    up = L // stack.dim

    def separated(t, xi):
        return lift(stack(t, down @ xi), up)

    seg3 = _integrate(separated, seg2[-1], g3)
    return _join([(g1, seg1), (g2, seg2), (g3, seg3)], tol,
                 [(float(scenario.window[0]), "undock-start", distance(seg1[-1], xi_T0)),
                  (float(scenario.window[1]), "undock-end", 0.0)])
