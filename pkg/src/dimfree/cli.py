"""Command-line front end.

    dimfree project --vec "[1,0,-1,0,1,2,-2]" --to 3
    dimfree simulate run.json --out traj.csv
    dimfree analyze sys.json

Exit codes: 0 ok, 2 config or parse error, 3 numerical failure. Errors
print one ``error: ...`` line on stderr. ``DIMFREE_TOL`` overrides the
equivalence tolerance.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as cfg
from .dvds import Trajectory, dock, realize, simulate, switch, undock
from .errors import (
    DimfreeError, MatchFailure, NonFiniteState, OddDimension, SingularFactor,
    UncontrollablePair,
)
from .esdd import distance, format_vector, lift, parse_vector, reduce
from .fieldlang import EvalError
from .linear import (
    LinearSystem, VaryingLinearSystem, ctrb, min_energy_control, obsv,
    omega_linear_system, project_system, project_varying, rank,
)
from .projector import build_projector, project
from .tensors import (
    eval_tensor, is_closed, is_riemannian_at, is_skew, is_symmetric,
    is_symplectic_at, lift_quadratic_form, lift_tensor,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
_NUMERIC = (NonFiniteState, EvalError, SingularFactor, UncontrollablePair,
            MatchFailure, ArithmeticError)


def _g(v: float) -> str:
    return f"{float(v) + 0.0:.6g}"


def _row(v) -> str:
    return " ".join(_g(x) for x in np.ravel(v))


def _matrix_lines(name: str, M) -> list[str]:
    if M is None:
        return [f"{name}=none"]
    return [f"{name}="] + ["  " + _row(r) for r in np.atleast_2d(M)]


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def _tolerance() -> float | None:
    raw = os.environ.get("DIMFREE_TOL")
    if raw is None or raw == "":
        return None
    try:
        tol = float(raw)
    except ValueError:
        raise cfg.ConfigError(f"DIMFREE_TOL is not a number: {raw!r}") from None
    if not tol > 0 or not math.isfinite(tol):
        raise cfg.ConfigError("DIMFREE_TOL must be positive")
    return tol


def _vec(text: str, flag: str) -> np.ndarray:
    try:
        return parse_vector(text)
    except ValueError as exc:
        raise cfg.ConfigError(f"{flag}: {exc}") from None


# ------------------------------------------------------------------ project

def _projectors(raw) -> dict[tuple[int, int], np.ndarray]:
    out = {}
    for key, M in (raw or {}).items():
        try:
            n, m = (int(p) for p in key.split(","))
        except ValueError:
            raise cfg.ConfigError(f"projectors: key {key!r} must read 'n,m'") from None
        out[(n, m)] = np.array(M, dtype=float)
    return out


def cmd_project(args, out) -> None:
    given = [a for a in ("vec", "system", "src") if getattr(args, a) is not None]
    if len(given) != 1:
        raise cfg.ConfigError("project needs exactly one of --vec, --system or --from")
    if args.to < 1:
        raise cfg.ConfigError("--to must be positive")
    if args.vec is not None:
        print(format_vector(project(_vec(args.vec, "--vec"), args.to), args.digits), file=out)
        return
    if args.src is not None:
        P = build_projector(args.src, args.to)
        if args.csv:
            out.write(P.to_csv())
        else:
            for row in P.matrix:
                print(_row(row), file=out)
        return
    data = cfg.load(args.system)
    cfg.check_keys(data, {"linear_system", "projectors"}, str(args.system), {"linear_system"})
    sys_ = cfg.linear_from(data["linear_system"])
    if isinstance(sys_, LinearSystem):
        if sys_.A.shape[0] != sys_.A.shape[1]:
            raise cfg.ConfigError("a fixed system needs a square A; use a schedule")
        stages = [("always", project_system(sys_, args.to))]
    else:
        projected = project_varying(sys_, args.to, _projectors(data.get("projectors")))
        stages = [(_when_text(s.when), p) for s, p in zip(sys_.stages, projected)]
    for when, p in stages:
        print(f"stage={when}", file=out)
        for name, M in (("A", p.A), ("B", p.B), ("C", p.C)):
            for line in _matrix_lines(name, M):
                print(line, file=out)


def _when_text(when) -> str:
    return when if isinstance(when, str) else f"[{_g(when[0])},{_g(when[1])})"


# ------------------------------------------------------- small vector tools

def cmd_lift(args, out) -> None:
    x = _vec(args.vec, "--vec")
    if (args.k is None) == (args.to is None):
        raise cfg.ConfigError("lift needs exactly one of --k or --to")
    k = args.k if args.k is not None else args.to // x.size
    if k < 1 or (args.to is not None and args.to % x.size):
        raise cfg.ConfigError(f"cannot lift R^{x.size} to R^{args.to}")
    print(_row(lift(x, k)), file=out)


def cmd_reduce(args, out) -> None:
    c = reduce(_vec(args.vec, "--vec"), _tolerance())
    print(f"dim={c.dim}", file=out)
    print(f"rep={_row(c.rep)}", file=out)


def cmd_distance(args, out) -> None:
    print(f"distance={_g(distance(_vec(args.a, '--a'), _vec(args.b, '--b')))}", file=out)


# --------------------------------------------------------------- simulation

_RUN_KEYS = {"system", "x0", "t0", "t1", "dt", "leaf"}


def _run_setting(args, data, name, default=None):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    if name in data:
        return data[name]
    if default is None:
        raise cfg.ConfigError(f"missing {name!r} (config key or --{name})")
    return default


def _start(args, data, key: str) -> np.ndarray:
    if args.x0 is not None:
        return _vec(args.x0, "--x0")
    if key not in data:
        raise cfg.ConfigError(f"missing {key!r} (config key or --x0)")
    return cfg._vector(data[key], key)


def _window(args, data) -> tuple[float, float, float]:
    t0 = float(_run_setting(args, data, "t0", 0.0))
    t1 = float(_run_setting(args, data, "t1"))
    dt = float(_run_setting(args, data, "dt"))
    if not dt > 0:
        raise cfg.ConfigError("dt must be positive")
    if not t1 > t0:
        raise cfg.ConfigError("t1 must exceed t0")
    return t0, t1, dt


def _plain_run(args, data, tol) -> Trajectory:
    cfg.check_keys(data, _RUN_KEYS, "config", {"system"})
    spec = cfg.system_from(data["system"])
    x0 = _start(args, data, "x0")
    leaf = int(data.get("leaf", math.lcm(spec.system.min_gen_dim, x0.size)))
    if leaf % x0.size:
        raise cfg.ConfigError(f"x0 in R^{x0.size} does not lie on leaf R^{leaf}")
    t0, t1, dt = _window(args, data)
    return simulate(realize(spec.system, leaf), lift(x0, leaf // x0.size), t0, t1, dt, tol)


def _switch_run(args, data, tol) -> Trajectory:
    cfg.check_keys(data, cfg.SCENARIO_KEYS - {"window", "lambda", "psi", "target", "z0", "xi0"},
                   "switch config", {"sys1", "sys2", "switch_time"})
    s1 = cfg.system_from(data["sys1"], "sys1")
    s2 = cfg.system_from(data["sys2"], "sys2")
    x0 = _start(args, data, "x0")
    t0, t1, dt = _window(args, data)
    T = float(data["switch_time"])
    steering = None
    if "steer" in data:
        if s1.A is None or s1.B is None:
            raise cfg.ConfigError("steer needs sys1 given by A and B")
        steering = min_energy_control(s1.A, s1.B, x0, cfg._vector(data["steer"], "steer"), T - t0)
    zT = cfg._vector(data["z_T"], "z_T") if "z_T" in data else None
    n2 = data.get("sys2_dim")
    return switch(s1.system, s2.system, x0, T, t0, t1, dt,
                  n2=None if n2 is None else int(n2), zT=zT, steering=steering, tol=tol)


def _dock_run(args, data, tol) -> Trajectory:
    scenario, raw = cfg.scenario_from(data)
    t0, t1, dt = _window(args, data)
    if scenario.mode == "dock":
        x0 = _start(args, raw, "x0")
        if "z0" not in raw:
            raise cfg.ConfigError("dock scenario needs 'z0'")
        return dock(scenario, x0, cfg._vector(raw["z0"], "z0"), t0, t1, dt, tol)
    return undock(scenario, _start(args, raw, "xi0"), t0, t1, dt, tol)


def _run(args, modes: tuple[str, ...]) -> Trajectory:
    data = cfg.load(args.config)
    mode = data.get("mode")
    if mode not in modes:
        allowed = ", ".join(m or "plain" for m in modes)
        raise cfg.ConfigError(f"{args.config}: mode {mode!r} not accepted here ({allowed})")
    tol = _tolerance()
    if mode is None:
        return _plain_run(args, data, tol)
    if mode == "switch":
        return _switch_run(args, data, tol)
    return _dock_run(args, data, tol)


def _emit(traj: Trajectory, args, out) -> None:
    if args.out is None:
        traj.to_csv(out)
        return
    with open(args.out, "w", newline="") as fh:
        traj.to_csv(fh)
    print(f"samples={len(traj)}", file=out)
    print(f"final_t={_g(traj.times[-1])}", file=out)
    print(f"final_dim={traj.final_state.size}", file=out)
    print(f"final_state={_row(traj.final_state)}", file=out)
    for t, label, jump in traj.events:
        print(f"event={label} t={_g(t)} jump={_g(jump)}", file=out)


def cmd_simulate(args, out) -> None:
    _emit(_run(args, (None, "switch", "dock", "undock")), args, out)


def cmd_dock(args, out) -> None:
    _emit(_run(args, ("dock", "undock")), args, out)


def cmd_switch(args, out) -> None:
    _emit(_run(args, ("switch",)), args, out)


# ----------------------------------------------------------------- analysis

def _linear_report(A, B, C) -> list[str]:
    n = A.shape[0]
    lines = [f"state_dim={n}"]
    if B is not None:
        r = rank(ctrb(A, B))
        lines += [f"ctrb_rank={r}", f"controllable={_yes(r == n)}"]
    if C is not None:
        r = rank(obsv(A, C))
        lines += [f"obsv_rank={r}", f"observable={_yes(r == n)}"]
    return lines


def _form_report(Q, points) -> list[str]:
    sym, skew = is_symmetric(Q, points), is_skew(Q, points)
    lines = [f"symmetric={_yes(sym)}", f"skew={_yes(skew)}",
             f"riemannian={_yes(is_riemannian_at(Q, points))}"]
    lines.append(f"closed={_yes(is_closed(Q, points)) if skew else 'n/a'}")
    try:
        lines.append(f"symplectic={_yes(is_symplectic_at(Q, points))}")
    except OddDimension:
        lines.append("symplectic=n/a")
    return lines


_TENSOR_KEYS = {"tensor", "quadratic_form", "points", "seed", "lift"}


def _tensor_report(data, where) -> list[str]:
    cfg.check_keys(data, _TENSOR_KEYS, where)
    if ("tensor" in data) == ("quadratic_form" in data):
        raise cfg.ConfigError(f"{where}: give exactly one of 'tensor' or 'quadratic_form'")
    seed = int(data.get("seed", 0))
    k = int(data.get("lift", 1))
    if k < 1:
        raise cfg.ConfigError(f"{where}: lift must be a positive integer")
    rng = np.random.default_rng(seed)
    if "quadratic_form" in data:
        Q = cfg.quadratic_form_from(data["quadratic_form"])
        points = cfg.points_from(data.get("points"), Q.dim, seed)
        lines = [f"dim={Q.dim}", "order=(2,0)"] + _form_report(Q, points)
        if k > 1:
            Qk = lift_quadratic_form(Q, k * Q.dim)
            up = build_projector(Q.dim, k * Q.dim).matrix
            err = 0.0
            for p in points:
                X1, X2 = rng.standard_normal((2, Q.dim))
                err = max(err, abs(Qk.evaluate(lift(p, k), up @ X1, up @ X2)
                                   - Q.evaluate(p, X1, X2)))
            lines += [f"lift_dim={k * Q.dim}", f"value_preservation_error={_g(err)}"]
        return lines
    T = cfg.tensor_from(data["tensor"])
    points = cfg.points_from(data.get("points"), T.dim, seed)
    lines = [f"dim={T.dim}", f"order=({T.r},{T.s})"]
    if (T.r, T.s) == (2, 0):
        lines += _form_report(T.as_quadratic_form(), points)
    if k > 1:
        Tk = lift_tensor(T, k)
        up = build_projector(T.dim, k * T.dim).matrix
        down = build_projector(k * T.dim, T.dim).matrix
        err = 0.0
        for p in points:
            Xs = list(rng.standard_normal((T.r, T.dim)))
            Ws = list(rng.standard_normal((T.s, T.dim)))
            lifted = eval_tensor(Tk, lift(p, k), [up @ X for X in Xs], [w @ down for w in Ws])
            err = max(err, abs(lifted - eval_tensor(T, p, Xs, Ws)))
        lines += [f"lift_dim={k * T.dim}", f"value_preservation_error={_g(err)}"]
    return lines


def _analyze_one(path: str, tensors_only: bool) -> list[str]:
    data = cfg.load(path)
    if tensors_only or "tensor" in data or "quadratic_form" in data:
        return _tensor_report(data, path)
    if "linear_system" in data:
        cfg.check_keys(data, {"linear_system"}, path)
        s = cfg.linear_from(data["linear_system"])
        if isinstance(s, VaryingLinearSystem):
            lines = []
            for st in s.stages:
                lines.append(f"stage={_when_text(st.when)}")
                lines += _stage_report(st.system)
            return lines
        return _stage_report(s)
    if "omega_system" in data:
        cfg.check_keys(data, {"omega_system"}, path)
        om = cfg.check_keys(data["omega_system"], {"A", "g", "h"}, "omega_system", {"A"})
        s, q = omega_linear_system(om["A"], om.get("g", ()), om.get("h", ()))
        return ([f"generator_dim={q}"] + _matrix_lines("A", s.A)
                + _matrix_lines("B", s.B) + _matrix_lines("C", s.C)
                + _linear_report(s.A, s.B, s.C))
    if "system" in data:
        cfg.check_keys(data, {"system"}, path)
        spec = cfg.system_from(data["system"])
        if spec.A is None:
            raise cfg.ConfigError(f"{path}: rank analysis needs a linear system (A, B, C)")
        raw = data["system"]
        C = cfg._matrix(raw["C"], "system.C") if "C" in raw else None
        return _linear_report(spec.A, spec.B, C)
    raise cfg.ConfigError(
        f"{path}: expected one of linear_system, omega_system, system, tensor, quadratic_form")


def _stage_report(s: LinearSystem) -> list[str]:
    if s.A.shape[0] != s.A.shape[1]:
        return [f"maps=R^{s.A.shape[1]}->R^{s.A.shape[0]}", "ranks=n/a"]
    return _linear_report(s.A, s.B, s.C)


def _fan_out(paths, jobs: int, tensors_only: bool, out) -> int:
    def task(path):
        try:
            return EXIT_OK, _analyze_one(path, tensors_only)
        except Exception as exc:  # reported per file, in order
            return _classify(exc), [_message(exc)]

    if jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(task, paths))
    else:
        results = [task(p) for p in paths]
    code = EXIT_OK
    for path, (status, lines) in zip(paths, results):
        if len(paths) > 1:
            print(f"== {path}", file=out)
        if status == EXIT_OK:
            for line in lines:
                print(line, file=out)
        else:
            print(f"error: {lines[0]}", file=sys.stderr)
            code = max(code, status)
    return code


def cmd_analyze(args, out) -> int:
    return _fan_out(args.configs, args.jobs, False, out)


def cmd_check_tensor(args, out) -> int:
    return _fan_out(args.configs, args.jobs, True, out)


# ------------------------------------------------------------------- driver

class _Parser(argparse.ArgumentParser):
    """Report usage errors as one ``error:`` line instead of exiting."""

    def error(self, message):
        raise cfg.ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dimfree",
                description="Cross-dimensional vectors, projections and dynamics.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("project", help="project a vector, projector or linear system")
    s.add_argument("--vec", help='vector literal, e.g. "[1, 0, -1]"')
    s.add_argument("--system", help="JSON config with a linear_system entry")
    s.add_argument("--from", dest="src", type=int, help="source dimension of a projector")
    s.add_argument("--to", type=int, required=True, help="target dimension")
    s.add_argument("--csv", action="store_true", help="print the projector as CSV")
    s.add_argument("--digits", type=int, default=4, help="decimals for --vec output")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("lift", help="lift a vector by repeating entries")
    s.add_argument("--vec", required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--to", type=int)
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("reduce", help="smallest representative of a vector's class")
    s.add_argument("--vec", required=True)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("distance", help="distance between vectors of any dimensions")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.set_defaults(func=cmd_distance)

    for name, func, text in (
            ("simulate", cmd_simulate, "integrate a system or scenario"),
            ("dock", cmd_dock, "run a dock or undock scenario"),
            ("switch", cmd_switch, "run a switching scenario")):
        s = sub.add_parser(name, help=text)
        s.add_argument("config")
        s.add_argument("--t0", type=float)
        s.add_argument("--t1", type=float)
        s.add_argument("--dt", type=float)
        s.add_argument("--x0", help="initial state literal, overrides the config")
        s.add_argument("--out", help="CSV path; CSV goes to stdout when omitted")
        s.set_defaults(func=func)

    for name, func, text in (
            ("analyze", cmd_analyze, "rank tests or tensor predicates"),
            ("check-tensor", cmd_check_tensor, "tensor predicates and lift checks")):
        s = sub.add_parser(name, help=text)
        s.add_argument("configs", nargs="+")
        s.add_argument("--jobs", type=int, default=1, help="configs processed concurrently")
        s.set_defaults(func=func)
    return p


def _classify(exc: BaseException) -> int:
    if isinstance(exc, _NUMERIC):
        return EXIT_NUMERIC
    return EXIT_CONFIG


def _message(exc: BaseException) -> str:
    if isinstance(exc, NonFiniteState):
        return f"numerical divergence: {exc}"
    text = str(exc) or type(exc).__name__
    return " ".join(text.split())


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except cfg.ConfigError as exc:
        print(f"error: {_message(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    out = io.StringIO()
    try:
        code = args.func(args, out)
    except (DimfreeError, ValueError, KeyError, TypeError, ArithmeticError, OSError) as exc:
        sys.stdout.write(out.getvalue())
        print(f"error: {_message(exc)}", file=sys.stderr)
        return _classify(exc)
    sys.stdout.write(out.getvalue())
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
