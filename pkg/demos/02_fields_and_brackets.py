# Vector fields that live on every dimension
#
# A field given on R^m is carried to R^n by projecting the point down,
# evaluating, and lifting the value back up. Fields are written as plain
# text expressions.

import numpy as np

from dimfree.esdd import lift, reduce
from dimfree.fields import (
    CovectorFieldGen, ScalarFieldGen, VectorFieldGen, extend_function, lie_bracket,
    lift_is_exact, lift_vector_field, pair,
)
from dimfree.fieldlang import EvalError, parse
from dimfree.projector import projector_matrix

# ## Expressions
f = parse("u1*sin(x1+x2)", 2, 2)
print(f, "at x=(0, pi/2), u=(2, 0):", f([0, np.pi / 2], [2, 0]))
try:
    parse("log(x1)", 1)([0])
except EvalError as exc:
    print("domain error:", exc.kind)

# ## A scalar function on every dimension
h = ScalarFieldGen.from_expr("x1+x2^2-x3", 3)
print("h on R^5 at e1:", extend_function(h, [1, 0, 0, 0, 0]))
print("h at (1,2,3) and at its lift:", extend_function(h, [1, 2, 3]),
      extend_function(h, lift([1.0, 2.0, 3.0], 2)))

# ## Lifting a field to R^6
X = VectorFieldGen.from_exprs(["x1+x2", "x2^2"])
z = np.arange(1.0, 7.0)
print("X lifted at", z, "->", lift_vector_field(X, z))

# On a leaf whose dimension is a multiple of the generator's, projecting the
# lifted field back recovers the original field exactly.
ctrl = VectorFieldGen.from_exprs(["u1*sin(x1+x2)", "u2*cos(x1+x2)"], input_dim=2)
x, u = np.zeros(2), np.ones(2)
for n in (3, 4):
    back = projector_matrix(n, 2) @ lift_vector_field(ctrl, projector_matrix(2, n) @ x, u)
    print(f"R^2 -> R^{n} -> R^2:", back, " exact leaf:", lift_is_exact(2, n))
print("original:", ctrl(x, u))

# ## Pairing a covector field with a vector field
w = CovectorFieldGen.from_exprs(["x1*x2", "cos(x1)"])
a = reduce([0.3, -0.2])
print("pairing on leaves 1..4:", [round(pair(w, X, a, k), 12) for k in range(1, 5)])

# ## Lie bracket across dimensions
#
# Fields generated on R^2 and R^3 are bracketed on R^6.
Y = VectorFieldGen.from_exprs(["x1^2", "0", "x2+x3"])
Z = lie_bracket(X, Y)
print("bracket generator dimension:", Z.dim)
print("[X, Y] at", z, "->", np.round(Z(z), 6))
