# Switching, docking and undocking
#
# Each run is a fixed-step RK4 integration. Samples are stored at whatever
# dimension the run is using, and every sample can be reduced to its
# equivalence class, so distances make sense across a change of dimension.

import json
from pathlib import Path

import numpy as np

from dimfree.config import scenario_from
from dimfree.dvds import OmegaSystem, dock, switch, undock
from dimfree.fields import VectorFieldGen
from dimfree.linear import min_energy_control

CONFIGS = Path(__file__).resolve().parent / "configs"

# ## Switching after steering
A, B = np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]])
u = min_energy_control(A, B, [0, 0], [1, 1], 1.0)
before = OmegaSystem(VectorFieldGen.linear(A, B))
after = OmegaSystem(VectorFieldGen.from_exprs(["-x1", "-x2", "-x3"]))
traj = switch(before, after, [0, 0], 1.0, 0.0, 2.0, 1e-3, steering=u)
for t, label, jump in traj.events:
    print(f"{label} at t={t}: jump {jump:.2e}")
print("state just before:", traj.states[1000], " just after:", traj.states[1001])
print("final:", traj.final_state)

# ## Two carts docking into one 3-dimensional body
sc, raw = scenario_from(json.loads((CONFIGS / "dock_two_carts.json").read_text()))
traj = dock(sc, raw["x0"], raw["z0"], raw["t0"], raw["t1"], raw["dt"])
dims = traj.realized_dims
print("dimension profile:", dims[0], "->", dims[-1],
      " first change at t =", traj.times[dims.index(dims[-1])])
print("largest step between samples:", traj.max_step_distance())
print("class of the final state:", traj.classes[-1])

# ## Undocking
sc, raw = scenario_from(json.loads((CONFIGS / "undock_two_carts.json").read_text()))
traj = undock(sc, raw["xi0"], raw["t0"], raw["t1"], raw["dt"])
print("dimension profile:", traj.realized_dims[0], "->", traj.realized_dims[-1])
print("largest step between samples:", traj.max_step_distance())

# Halving the step halves the largest jump between samples, to first order.
for dt in (0.02, 0.01, 0.005):
    step = undock(sc, raw["xi0"], raw["t0"], raw["t1"], dt).max_step_distance()
    print(f"dt={dt}: max step {step:.6f}, ratio to dt {step / dt:.4f}")

# The CSV has one row per sample with trailing cells left empty while the
# state is short.
print(traj.to_csv().splitlines()[0])
print(traj.to_csv().splitlines()[1])
