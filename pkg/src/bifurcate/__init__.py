"""Finite-difference discretization, eigenvalue analysis, and bifurcation-curve
continuation for elliptic problems with superlinear boundary flux."""

from .grid import (
    Domain,
    Grid,
    GridFunction,
    NodeClass,
    NodeKind,
    build_grid,
    diff_backward,
    diff_central,
    diff_forward,
    discrete_laplacian,
    normal_derivative,
    second_diff,
)
from .nonlinearity import (
    CutoffParams,
    Polynomial,
    apriori_bound,
    cutoff_eval,
    cutoff_inactive,
    eval_poly,
    eval_poly_deriv,
    supersolution_level,
)
from .assembly import (
    SingleProblem,
    SystemProblem,
    assemble_linear_operator,
    complete_with_corners,
    jacobian_single,
    jacobian_system,
    residual_single,
    residual_system,
    unknown_indices,
    with_lambda,
)
from .eigen import (
    SingleEigenResult,
    SystemEigenResult,
    eigenfunction_single,
    eigenfunction_system,
    is_infinite,
    lambda1_single,
    lambda1_system,
    solve_for_lambda_quadratic,
)
from .solve import (
    Certificates,
    NewtonConfig,
    SolveOutcome,
    SolveStatus,
    fixed_point_map,
    fixed_point_solve,
    newton_solve,
    verify_certificates,
)
from .continuation import (
    Branch,
    BranchPoint,
    ConstantProfile,
    Direction,
    EigenfunctionProfile,
    Regime,
    StoredSolution,
    SweepPlan,
    Termination,
    TerminationKind,
    detect_bifurcation_lambda,
    small_branch_amplitude,
    sweep,
    trace_full_curve,
)

__version__ = "0.1.0"
