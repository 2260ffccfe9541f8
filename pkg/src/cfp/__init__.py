"""Centralized and distributed solvers for convex feasibility problems over digraphs."""

from .algorithms import (
    ALGORITHMS,
    ProblemSpec,
    SolverConfig,
    StepSchedule,
    centralized_continuous_step,
    centralized_discrete_step,
    distributed_continuous_step,
    distributed_discrete_step,
    linear_cfp_step,
    validate_schedule,
)
from .config import NumericConfig, default_config
from .convex import (
    AffineFromEquation,
    Ball,
    Box,
    Halfspace,
    Hyperplane,
    Linear,
    LinearBlock,
    Quadratic,
    WholeSpace,
    always_satisfied,
    distance,
    plus_value,
    project,
    psi_value_and_grad,
    subgradient_plus,
)
from .errors import CFPError
from .graph import (
    DeltaGraphParams,
    Digraph,
    SwitchingSchedule,
    contraction_rate,
    delta_graph,
    has_spanning_tree,
    is_balanced,
    is_strongly_connected,
    laplacian,
    laplacian_spectrum,
    left_null_eigenvector,
    step_size_bound,
)
from .harness import RunReport, Scenario, Trajectory, consensus_error, feasibility_residuals, run
from .scenarios import load_scenario, paper_scenario

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "ProblemSpec",
    "SolverConfig",
    "StepSchedule",
    "centralized_continuous_step",
    "centralized_discrete_step",
    "distributed_continuous_step",
    "distributed_discrete_step",
    "linear_cfp_step",
    "validate_schedule",
    "NumericConfig",
    "default_config",
    "AffineFromEquation",
    "Ball",
    "Box",
    "Halfspace",
    "Hyperplane",
    "Linear",
    "LinearBlock",
    "Quadratic",
    "WholeSpace",
    "always_satisfied",
    "distance",
    "plus_value",
    "project",
    "psi_value_and_grad",
    "subgradient_plus",
    "CFPError",
    "DeltaGraphParams",
    "Digraph",
    "SwitchingSchedule",
    "contraction_rate",
    "delta_graph",
    "has_spanning_tree",
    "is_balanced",
    "is_strongly_connected",
    "laplacian",
    "laplacian_spectrum",
    "left_null_eigenvector",
    "step_size_bound",
    "RunReport",
    "Scenario",
    "Trajectory",
    "consensus_error",
    "feasibility_residuals",
    "run",
    "load_scenario",
    "paper_scenario",
]
