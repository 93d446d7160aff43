"""Stochastic forward-backward algorithm over random monotone operators."""

from .catalog import (
    CubicGradient,
    DataLinearRegression,
    L1Subdifferential,
    NormalCone,
    QuadraticGradient,
    ScaledAtom,
    SkewLinear,
    SumWithQuadratic,
    make_atom,
    make_domain,
    prox_l1,
    rotation_quarter_turn,
    soft_threshold,
    zero_operator,
)
from .config import ExperimentConfig, parse_config, validate
from .errors import (
    ConfigError,
    ConstructionError,
    DivergenceError,
    DomainError,
    EmptySampleError,
    FlowIntegrationError,
    InfeasibilityError,
    PreconditionError,
    StochFBError,
)
from .flow import (
    DiagnosticsReport,
    FlowTrajectory,
    apt_deviation,
    diagnostics,
    domain_distance_series,
    fejer_series,
    integrate_flow,
    tail_oscillation,
)
from .geometry import Affine, Ball, Box, Domain, FullSpace, Halfspace, dykstra_project
from .operators import (
    OperatorAtom,
    containment_tol,
    graph_sample,
    least_norm,
    project_domain,
    resolvent,
    yosida,
)
from .program import (
    AuditReport,
    RandomProgram,
    ZeroCertificate,
    audit_b_growth,
    audit_compact_moment,
    audit_interior_domain,
    audit_linear_regularity,
    audit_resolvent_projection_gap,
)
from .scenarios import SCENARIO_IDS, run_scenario, scenario_config, scenario_oracle
from .solver import Schedule, Trajectory, averaged, interpolate, run, step
from .values import (
    BoxSet,
    OffsetSet,
    RaySet,
    SingletonSet,
    SubspaceSet,
    ValueSet,
    minkowski_distance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
