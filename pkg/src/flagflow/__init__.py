"""Gradient flows of height functions on flag manifolds as orbits of one-parameter subgroups."""
from ._backend import NAME as BACKEND
from .analysis import (
    classify_limit, critical_points, is_extrinsic_symmetric, multinomial_count, verify_theorem_5_1,
)
from .errors import (
    ContextMismatchError, DegeneracyError, FlagFlowError, GenericityError,
    GroupingAmbiguityError, PreconditionError, StiffnessError,
)
from .flow import (
    HeightFunction, ambient_gradient, closed_form_flow, numeric_flow, s_gradient, s_inner,
    verify_theorem_4_1,
)
from .kahler import CompactOrbitPoint, kahler_form, kahler_metric, verify_theorem_6_1
from .lie import AlgebraContext, AmbientElement, Family, bracket, inner, sigma
from .orbit import OrbitPoint, exp_act, group_act, infinitesimal_act, k_act
from .roots import decompose, triangular_split

__version__ = "0.1.0"
