"""Integrable maps studied through their associated vector fields.

Given a diffeomorphism F of an open set in R^n with n-1 functionally
independent first integrals and a multiplier mu, this package builds the
vector field whose flow interpolates F on the common level sets, checks
the defining functional equations, and measures periods, flight times,
component multiplicities and rotation numbers along those level sets.
"""

from .catalog import available_maps, builtin
from .fields import (
    ClassificationReport,
    DerivedMultiplier,
    MeasureComparison,
    Residual,
    VectorFieldSpec,
    build_field,
    check_condition_X,
    check_condition_mu,
    check_invariant_measure,
    classify_multiplier,
    sigma_combine,
)
from .flow import (
    BlowUpError,
    DomainExitError,
    FlowError,
    IntegratorConfig,
    NearCriticalError,
    NonClosureError,
    OrbitClass,
    OrbitResult,
    OrbitTrace,
    component_multiplicity,
    detect_period,
    integrate,
    time_to_image,
    trace_orbit,
)
from .linalg import cross, det, numeric_gradient, numeric_jacobian
from .maps import (
    MapSpec,
    MultiplierSpec,
    OutsideDomainError,
    ScalarField,
    SigmaClass,
    constant_field,
    integral_values,
    jacobian_det,
    product_field,
)
from .portrait import PortraitSummary, render_portrait
from .rotation import (
    FlowRotation,
    HyperbolicFixedPointError,
    MonotonicityReport,
    NotInvariantError,
    NotStarShapedError,
    SeedRay,
    SweepRow,
    fixed_point_rotation,
    flow_rotation_data,
    monotonicity_report,
    rotation_number_birkhoff,
    rotation_number_flow,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "available_maps", "builtin",
    "MapSpec", "MultiplierSpec", "ScalarField", "SigmaClass",
    "constant_field", "product_field", "integral_values", "jacobian_det",
    "OutsideDomainError",
    "Residual", "VectorFieldSpec", "build_field",
    "check_condition_X", "check_condition_mu",
    "ClassificationReport", "classify_multiplier",
    "DerivedMultiplier", "sigma_combine",
    "MeasureComparison", "check_invariant_measure",
    "IntegratorConfig", "OrbitClass", "OrbitResult", "OrbitTrace",
    "integrate", "detect_period", "trace_orbit",
    "time_to_image", "component_multiplicity",
    "FlowError", "DomainExitError", "BlowUpError",
    "NearCriticalError", "NonClosureError",
    "FlowRotation", "flow_rotation_data",
    "rotation_number_flow", "rotation_number_birkhoff", "fixed_point_rotation",
    "NotInvariantError", "NotStarShapedError", "HyperbolicFixedPointError",
    "SeedRay", "SweepRow", "sweep",
    "MonotonicityReport", "monotonicity_report",
    "PortraitSummary", "render_portrait",
    "cross", "det", "numeric_jacobian", "numeric_gradient",
    "__version__",
]
