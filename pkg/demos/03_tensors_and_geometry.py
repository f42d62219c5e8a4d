# Tensor fields, metrics and symplectic forms
#
# A tensor field is stored as a structure matrix of expressions. Lifting it
# to a larger leaf keeps every value the same when the arguments are lifted
# along with the point.

import json
from pathlib import Path

import numpy as np

from dimfree.projector import projector_matrix
from dimfree.tensors import (
    QuadFormGen, TensorFieldGen, eval_tensor, is_closed, is_riemannian_at, is_skew,
    is_symplectic_at, lift_quadratic_form, lift_tensor,
)

CONFIGS = Path(__file__).resolve().parent / "configs"

# A (2,1) tensor on R^2: two vector slots, one covector slot.
T = TensorFieldGen.from_exprs(
    [["0", "sin(x1+x2)", "0", "cos(x1+x2)"], ["-cos(x1+x2)", "0", "sin(x1+x2)", "0"]],
    dim=2, r=2, s=1)
x = np.array([0.2, 0.4])
X1, X2, w = np.array([1.0, 0.5]), np.array([-0.3, 2.0]), np.array([0.7, -1.0])
print("value on R^2:", eval_tensor(T, x, [X1, X2], [w]))

up, down = projector_matrix(2, 4), projector_matrix(4, 2)
T4 = lift_tensor(T, 2)
print("value on R^4:", eval_tensor(T4, up @ x, [up @ X1, up @ X2], [w @ down]))
print("structure matrix on R^4 (times 4):")
print(np.round(4 * T4(up @ x), 4))

# ## A metric
#
# The round-sphere metric in stereographic coordinates is positive definite
# everywhere, so it is a Riemannian structure.
cfg = json.loads((CONFIGS / "sphere_metric.json").read_text())
M = QuadFormGen.from_exprs(cfg["quadratic_form"]["M"])
print("M(0, 0) =")
print(M([0, 0]))
grid = [np.array([a, b]) for a in np.linspace(-2, 2, 5) for b in np.linspace(-2, 2, 5)]
print("Riemannian on the grid:", is_riemannian_at(M, grid))

# ## Symplectic forms
sigma = QuadFormGen.constant([[0, -1], [1, 0]])
print("sigma skew:", is_skew(sigma, grid), " closed:", is_closed(sigma, grid),
      " symplectic:", is_symplectic_at(sigma, grid))

# Lifting keeps skewness.
sigma6 = lift_quadratic_form(sigma, 6)
print("lifted to R^6, skew:", is_skew(sigma6, [np.zeros(6)]))

# A skew form whose coefficients vary the wrong way is not closed.
cfg = json.loads((CONFIGS / "twisted_form.json").read_text())
twisted = QuadFormGen.from_exprs(cfg["quadratic_form"]["M"])
print("twisted form closed:", is_closed(twisted, [np.array([0.1, 0.2, 0.3])]))
