"""Loading and validating JSON configuration files.

Every loader rejects keys it does not know so that typos surface as
errors instead of silently falling back to defaults.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .dvds import Blend, DockingScenario, OmegaSystem, VirtualForce
from .errors import DimfreeError
from .fieldlang import parse
from .fields import ScalarFieldGen, VectorFieldGen
from .linear import LinearSystem, Stage, VaryingLinearSystem
from .tensors import QuadFormGen, TensorFieldGen

__all__ = [
    "ConfigError", "load", "check_keys", "system_from", "linear_from",
    "tensor_from", "scenario_from", "points_from", "SystemSpec",
]


class ConfigError(DimfreeError, ValueError):
    """Invalid configuration file or command-line input."""


def load(path: str | Path) -> dict:
    """Read a JSON object from ``path``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def check_keys(obj: Any, allowed: set[str], where: str, required: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}")
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"{where}: missing key {missing[0]!r}")
    return obj


def _matrix(value, where: str) -> np.ndarray:
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a numeric matrix") from None
    if a.ndim == 1:
        a = a.reshape(-1, 1) if where.endswith("B") else a.reshape(1, -1)
    if a.ndim != 2 or a.size == 0:
        raise ConfigError(f"{where} must be a non-empty matrix")
    return a


def _vector(value, where: str) -> np.ndarray:
    try:
        v = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a list of numbers") from None
    if v.ndim != 1 or v.size == 0:
        raise ConfigError(f"{where} must be a non-empty list of numbers")
    return v


def _strings(value, where: str) -> list[str]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where} must be a non-empty list of expressions")
    return [str(v) for v in value]


@dataclass(frozen=True)
class SystemSpec:
    """A parsed system entry; ``A`` and ``B`` are kept for linear systems."""

    system: OmegaSystem
    A: np.ndarray | None = None
    B: np.ndarray | None = None


_SYSTEM_KEYS = {"dim", "f", "inputs", "u", "h", "A", "B", "C"}


def system_from(obj, where: str = "system") -> SystemSpec:
    """Build a system from ``{"f": [...]}`` or ``{"A": ..., "B": ...}``.

    ``u`` gives open-loop inputs as expressions in ``t``; ``h`` gives
    outputs as expressions in the state (``C`` for linear systems).
    """
    check_keys(obj, _SYSTEM_KEYS, where)
    if ("f" in obj) == ("A" in obj):
        raise ConfigError(f"{where}: give exactly one of 'f' or 'A'")
    signal = None
    if "u" in obj:
        u_exprs = [parse(s, 0, 0) for s in _strings(obj["u"], f"{where}.u")]
        signal = lambda t: np.array([e.evaluate((), None, t) for e in u_exprs])  # noqa: E731
    if "f" in obj:
        texts = _strings(obj["f"], f"{where}.f")
        if "dim" in obj and obj["dim"] != len(texts):
            raise ConfigError(f"{where}: dim {obj['dim']} but {len(texts)} components in f")
        n_in = int(obj.get("inputs", len(obj.get("u", []))))
        F = VectorFieldGen.from_exprs(texts, n_in)
        outputs = tuple(ScalarFieldGen.from_expr(s, F.dim)
                        for s in _strings(obj["h"], f"{where}.h")) if "h" in obj else ()
        if "B" in obj or "C" in obj:
            raise ConfigError(f"{where}: 'B' and 'C' only apply to linear systems")
        return SystemSpec(OmegaSystem(F, outputs, signal))
    A = _matrix(obj["A"], f"{where}.A")
    B = _matrix(obj["B"], f"{where}.B") if "B" in obj else None
    if "f" in obj or "h" in obj or "inputs" in obj:
        raise ConfigError(f"{where}: linear systems take A, B, C")
    if A.shape[0] != A.shape[1]:
        raise ConfigError(f"{where}.A must be square")
    if B is not None and B.shape[0] != A.shape[0]:
        raise ConfigError(f"{where}.B must have {A.shape[0]} rows")
    outputs = ()
    if "C" in obj:
        C = _matrix(obj["C"], f"{where}.C")
        if C.shape[1] != A.shape[0]:
            raise ConfigError(f"{where}.C must have {A.shape[0]} columns")
        outputs = tuple(ScalarFieldGen.linear(row) for row in C)
    F = VectorFieldGen.linear(A, B)
    if B is not None and signal is None:
        zeros = np.zeros(B.shape[1])
        signal = lambda t: zeros  # noqa: E731
    return SystemSpec(OmegaSystem(F, outputs, signal), A, B)


_WHEN = re.compile(r"^\[\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)$")


def _when(value, where: str):
    if value in ("even", "odd", "always"):
        return value
    m = _WHEN.match(str(value))
    if m is None:
        raise ConfigError(f"{where}: 'when' must be even, odd, always or '[t0,t1)'")
    return float(m.group(1)), float(m.group(2))


def linear_from(obj, where: str = "linear_system") -> LinearSystem | VaryingLinearSystem:
    """Build a fixed or scheduled linear system."""
    check_keys(obj, {"kind", "A", "B", "C", "schedule"}, where)
    kind = obj.get("kind", "continuous")
    if kind not in ("continuous", "discrete"):
        raise ConfigError(f"{where}.kind must be 'continuous' or 'discrete'")
    if "schedule" in obj:
        if "A" in obj:
            raise ConfigError(f"{where}: give either A or schedule")
        stages = []
        for i, st in enumerate(obj["schedule"]):
            w = f"{where}.schedule[{i}]"
            check_keys(st, {"when", "A", "B", "C"}, w, {"when", "A"})
            stages.append(Stage(_when(st["when"], w), _linear_stage(st, kind, w)))
        return VaryingLinearSystem(tuple(stages))
    if "A" not in obj:
        raise ConfigError(f"{where}: missing key 'A'")
    system = _linear_stage(obj, kind, where)
    if system.A.shape[0] != system.A.shape[1]:
        raise ConfigError(f"{where}.A must be square outside a schedule")
    return system


def _linear_stage(obj, kind, where) -> LinearSystem:
    A = _matrix(obj["A"], f"{where}.A")
    B = _matrix(obj["B"], f"{where}.B") if "B" in obj else None
    C = _matrix(obj["C"], f"{where}.C") if "C" in obj else None
    return LinearSystem(A, B, C, kind)


def tensor_from(obj, where: str = "tensor") -> TensorFieldGen:
    check_keys(obj, {"dim", "r", "s", "gamma"}, where, {"dim", "r", "s", "gamma"})
    rows = obj["gamma"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{where}.gamma must be a list of rows")
    return TensorFieldGen.from_exprs(rows, int(obj["dim"]), int(obj["r"]), int(obj["s"]))


def quadratic_form_from(obj, where: str = "quadratic_form") -> QuadFormGen:
    check_keys(obj, {"dim", "M"}, where, {"M"})
    return QuadFormGen.from_exprs(obj["M"], obj.get("dim"))


def points_from(obj, dim: int, seed: int = 0) -> list[np.ndarray]:
    """Sample points from the config or a seeded default set in ``[-1, 1]^dim``."""
    if obj is None:
        rng = np.random.default_rng(seed)
        return [np.zeros(dim), *rng.uniform(-1, 1, size=(4, dim))]
    pts = [_vector(p, "points[]") for p in obj]
    if not pts or any(p.size != dim for p in pts):
        raise ConfigError(f"points must be a non-empty list of {dim}-vectors")
    return pts


_PSI_KEYS = {"kind", "kappa", "force", "exprs"}


def _psi(obj) -> VirtualForce:
    check_keys(obj, _PSI_KEYS, "psi", {"kind"})
    kind = obj["kind"]
    if kind == "proportional":
        return VirtualForce("proportional", float(obj.get("kappa", 1.0)))
    if kind == "clutch":
        return VirtualForce("clutch", float(obj.get("force", 1.0)))
    if kind == "expr":
        return VirtualForce("expr", exprs=tuple(_strings(obj.get("exprs"), "psi.exprs")))
    if kind == "none":
        return VirtualForce("none")
    raise ConfigError(f"psi.kind must be proportional, clutch, expr or none, not {kind!r}")


SCENARIO_KEYS = {"mode", "window", "lambda", "psi", "sys1", "sys2", "target",
                 "x0", "z0", "xi0", "t0", "t1", "dt", "switch_time", "sys2_dim",
                 "z_T", "steer"}


def scenario_from(obj) -> tuple[DockingScenario, dict]:
    """Build a dock or undock scenario; also returns the raw run settings."""
    check_keys(obj, SCENARIO_KEYS, "scenario", {"mode", "window", "sys1", "sys2", "target"})
    window = _vector(obj["window"], "window")
    if window.size != 2:
        raise ConfigError("window must be [T0, T1]")
    blend = Blend.from_spec(str(obj.get("lambda", "smoothstep")))
    psi = _psi(obj.get("psi", {"kind": "proportional"}))
    return DockingScenario(
        system_from(obj["sys1"], "sys1").system,
        system_from(obj["sys2"], "sys2").system,
        system_from(obj["target"], "target").system,
        (float(window[0]), float(window[1])), blend, psi, obj["mode"]), obj
