# Vectors of different dimensions
#
# Two vectors can be added, compared and measured even when their lengths
# differ. The trick is to repeat every entry of each vector until both reach
# the least common multiple of the two lengths.

import numpy as np

from dimfree.esdd import distance, equivalent, inner, lift, norm, reduce, stp, vminus, vplus
from dimfree.projector import exact_projector, project, projector_matrix

x = np.array([1.0, 2.0])
y = np.array([1.0, 0.0, -1.0])

# Both are taken to R^6 before the usual operations apply.
print("lift x:", lift(x, 3))
print("lift y:", lift(y, 2))
print("x + y =", vplus(x, y))
print("x - y =", vminus(x, y))

# The inner product is normalised by the common length, so it does not
# change when either argument is replaced by a repeated copy.
print("<x, y> =", inner(x, y), "  <x (x) J_2, y> =", inner(lift(x, 2), y))
print("|x| =", norm(x), "  |x (x) J_5| =", norm(lift(x, 5)))

# ## Equivalence classes
#
# (1, 2) and (1, 1, 2, 2) sit at distance zero: they are the same point of
# the quotient space. `reduce` finds the shortest representative.

a = reduce([1, 1, 2, 2, 1, 1, 2, 2])
print(a, "dimension", a.dim)
print("equivalent:", equivalent([1, 2], [1, 1, 2, 2]), " distance:", distance([1, 2], [1, 1, 2, 2]))

# Integer input keeps exact arithmetic, so the distance to a genuinely
# different vector is a clean number.
print("distance((1,2), (2,1)) =", distance([1, 2], [2, 1]))

# The semi-tensor product generalises the matrix product to shapes that do
# not conform, again through the least common multiple.
print("stp of a 1x2 and a 1x2:", stp([[1, 2]], [[3, 4]]))

# ## Projection between dimensions
#
# The closest point of R^m to a vector of any length is a block average.
# The projector is built from exact rationals.

xi = np.array([1, 0, -1, 0, 1, 2, -2])
print("project to R^3:", project(xi, 3))
print("as floats:", np.round(project(xi.astype(float), 3), 4))
print("projector R^5 -> R^3 (times 5):")
print((exact_projector(5, 3) * 5).astype(int))

# Lifting by an integer factor and projecting back is lossless.
P_up, P_down = projector_matrix(3, 6), projector_matrix(6, 3)
print("down @ up =")
print(P_down @ P_up)

# The residual of a projection is orthogonal to the result.
x3 = project(xi.astype(float), 3)
print("<xi - x, x> =", inner(vminus(xi.astype(float), x3), x3))
