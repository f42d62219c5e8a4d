# Linear systems whose dimension changes
#
# A discrete-time system alternates between a 5-dimensional and a
# 4-dimensional state. Projecting every stage onto R^3 in the least-squares
# sense gives an ordinary 3-dimensional time-varying system.

import json
from pathlib import Path

import numpy as np

from dimfree.config import linear_from
from dimfree.linear import (
    ctrb, gramian, min_energy_control, obsv, omega_linear_system, project_varying, rank,
    simulate_discrete,
)

CONFIGS = Path(__file__).resolve().parent / "configs"
np.set_printoptions(precision=4, suppress=True)

cfg = json.loads((CONFIGS / "parity_schedule.json").read_text())
schedule = linear_from(cfg["linear_system"])
for label, stage in zip(("even", "odd"), project_varying(schedule, 3)):
    print(f"{label} steps, A:\n{stage.A}\nB:\n{stage.B}\nC:\n{stage.C}")

states = simulate_discrete(schedule, np.ones(5), 4)
print("state dimensions:", [s.size for s in states])

# ## Generators of different dimensions
#
# The drift is generated on R^2, the input fields on R^4. Everything is
# lifted to R^4, where the usual rank tests apply.
sys4, q = omega_linear_system([[2, 2], [0, 2]], [[1, 0, 0, 1], [0, 1, 0, 0]], [[-1, 1]])
print("common dimension", q)
print("A =\n", sys4.A)
print("C =", sys4.C)
print("controllability rank", rank(ctrb(sys4.A, sys4.B)),
      " observability rank", rank(obsv(sys4.A, sys4.C)))

# ## Steering a double integrator
#
# Driving (0,0) to (1,1) in one time unit lands on a point whose shortest
# representative has dimension 1, so it can be handed to a system of any
# dimension.
A, B = np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]])
print("Gramian on [0, 1]:\n", gramian(A, B, 1.0))
u = min_energy_control(A, B, [0, 0], [1, 1], 1.0)
print("u(t) polynomial coefficients (constant, t):", u.coefficients().ravel())
print(u.report())
