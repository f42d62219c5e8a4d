"""Vector algebra, projection and dynamics across Euclidean spaces of different dimensions."""

from .errors import (
    DimensionMismatch, DimfreeError, MatchFailure, NonFiniteState, NotEquivalent,
    NotSkew, OddDimension, ScheduleError, ScheduleMismatch, SingularFactor,
    UncontrollablePair, UnsupportedOrder,
)
from .esdd import (
    DEFAULT_TOL, EquivClass, class_add, class_scale, class_sub, distance,
    equivalent, gcd_vec, inner, kron, lcm_vec, lift, norm, reduce, stp, vminus,
    vplus,
)
from .projector import Projector, build_projector, project, project_class
from .fieldlang import ArityViolation, EvalError, ExprSyntaxError, UnknownIdentifier, parse
from .fields import (
    CovectorFieldGen, ScalarFieldGen, VectorFieldGen, extend_function, lie_bracket,
    lift_covector_field, lift_vector_field, pair,
)
from .tensors import (
    QuadFormGen, TensorFieldGen, eval_tensor, is_closed, is_riemannian_at, is_skew,
    is_symmetric, is_symplectic_at, lift_quadratic_form, lift_tensor,
)
from .linear import (
    LinearSystem, Stage, VaryingLinearSystem, ctrb, gramian, lift_linear_function,
    lift_linear_vf, matrix_exp, min_energy_control, obsv, project_A, project_C,
    project_varying, rank,
)
from .dvds import (
    Blend, DockingScenario, OmegaSystem, Trajectory, VirtualForce, dock, realize,
    simulate, switch, undock,
)

__version__ = "0.1.0"
