"""Damped Newton solver, monotone fixed-point iteration, and solution certificates.

``newton_solve`` runs Newton with residual (max-norm) backtracking on either
problem type.  Non-convergence is reported as a status, never raised: the
continuation layer interprets a failed solve as a turning-point signal.
``Converged`` always implies the re-evaluated residual is below
``residual_tol``; a step that collapses below ``step_tol`` while the residual
is still large is reported as ``LINE_SEARCH_FAILED`` (stagnation).

``fixed_point_solve`` iterates the linear comparison map: given the previous
iterate v, solve A w = b(v) with the clamped boundary flux b(v) on boundary
rows.  Started from the two-level supersolution the iterates decrease
monotonically and stay inside the bracket [0, supersolution] entrywise; a
bracket violation is an invariant breach and raises.

``verify_certificates`` re-checks the qualitative facts on a computed
solution: strict positivity above the floor, maximum attained on the
boundary, the a-priori bound, and (when a clamp is configured) that the
clamp was inactive so the solution also solves the unmodified problem.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .assembly import (
    SingleProblem,
    SystemProblem,
    assemble_linear_operator,
    boundary_positions,
    complete_with_corners,
    flux_rhs,
    jacobian_single,
    jacobian_system,
    residual_single,
    residual_system,
    solve_linear,
    split_system_vector,
    unknown_indices,
    unknown_vector,
)
from .grid import GridFunction
from .nonlinearity import (
    apriori_bound,
    cutoff_eval,
    cutoff_inactive,
    eval_poly,
    supersolution_level,
)


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    MAX_ITERS = "max_iters"
    LINE_SEARCH_FAILED = "line_search_failed"


@dataclass(frozen=True)
class NewtonConfig:
    residual_tol: float = 1e-6
    step_tol: float = 1e-6
    max_iters: int = 100
    backtrack_factor: float = 0.5
    min_step_fraction: float = 2.0**-20
    positivity_floor: float = 1e-12

    def __post_init__(self):
        if self.residual_tol <= 0 or self.step_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class Certificates:
    positive: bool
    max_on_boundary: bool
    apriori_ok: bool
    cutoff_inactive: bool

    def all_passed(self) -> bool:
        return self.positive and self.max_on_boundary and self.apriori_ok and self.cutoff_inactive


@dataclass(frozen=True)
class SolveOutcome:
    status: SolveStatus
    u: GridFunction | None
    v: GridFunction | None
    vector: np.ndarray | None
    iters: int
    final_residual_norm: float
    certificates: Certificates | None

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED


def _residual(problem, vec):
    if isinstance(problem, SingleProblem):
        return residual_single(problem, vec)
    return residual_system(problem, vec)


def _jacobian(problem, vec):
    if isinstance(problem, SingleProblem):
        return jacobian_single(problem, vec)
    return jacobian_system(problem, vec)


def _coerce_initial(problem, initial) -> np.ndarray:
    grid = problem.grid
    if isinstance(problem, SingleProblem):
        if isinstance(initial, GridFunction):
            return unknown_vector(grid, initial)
        return unknown_vector(grid, np.asarray(initial, dtype=float))
    if isinstance(initial, (tuple, list)) and len(initial) == 2:
        u0 = unknown_vector(grid, initial[0])
        v0 = unknown_vector(grid, initial[1])
        return np.concatenate([u0, v0])
    uvec, vvec = split_system_vector(grid, np.asarray(initial, dtype=float))
    return np.concatenate([uvec, vvec])


def _make_outcome(problem, status, vec, iters, cfg) -> SolveOutcome:
    grid = problem.grid
    res_norm = math.inf
    u = v = None
    if vec is not None and np.all(np.isfinite(vec)):
        res_norm = float(np.max(np.abs(_residual(problem, vec))))
        if isinstance(problem, SingleProblem):
            u = GridFunction(grid, complete_with_corners(grid, vec))
        else:
            uvec, vvec = split_system_vector(grid, vec)
            u = GridFunction(grid, complete_with_corners(grid, uvec))
            v = GridFunction(grid, complete_with_corners(grid, vvec))
    certs = None
    if status is SolveStatus.CONVERGED:
        certs = verify_certificates(problem, vec, cfg)
    return SolveOutcome(status, u, v, None if vec is None else vec.copy(),
                        iters, res_norm, certs)


def newton_solve(problem, initial, cfg: NewtonConfig | None = None) -> SolveOutcome:
    """Damped Newton iteration on the discrete residual.

    Backtracks by halving until the residual max-norm strictly decreases;
    gives up below the minimum step fraction.  A singular Jacobian maps to
    LINE_SEARCH_FAILED, non-finite values to DIVERGED.
    """
    cfg = cfg or NewtonConfig()
    x = _coerce_initial(problem, initial)
    r = _residual(problem, x)
    if not np.all(np.isfinite(r)):
        return _make_outcome(problem, SolveStatus.DIVERGED, None, 0, cfg)
    rnorm = float(np.max(np.abs(r)))
    if rnorm <= cfg.residual_tol:
        return _make_outcome(problem, SolveStatus.CONVERGED, x, 0, cfg)

    for it in range(1, cfg.max_iters + 1):
        J = _jacobian(problem, x)
        try:
            d = solve_linear(J, -r)
        except Exception:
            return _make_outcome(problem, SolveStatus.LINE_SEARCH_FAILED, x, it - 1, cfg)
        if not np.all(np.isfinite(d)):
            return _make_outcome(problem, SolveStatus.LINE_SEARCH_FAILED, x, it - 1, cfg)

        t = 1.0
        accepted = False
        while t >= cfg.min_step_fraction:
            x_new = x + t * d
            r_new = _residual(problem, x_new)
            if np.all(np.isfinite(r_new)):
                rnorm_new = float(np.max(np.abs(r_new)))
                if rnorm_new < rnorm:
                    accepted = True
                    break
            else:
                rnorm_new = math.inf
            t *= cfg.backtrack_factor
        if not accepted:
            if not np.all(np.isfinite(r_new)):
                return _make_outcome(problem, SolveStatus.DIVERGED, x, it, cfg)
            return _make_outcome(problem, SolveStatus.LINE_SEARCH_FAILED, x, it, cfg)

        step_norm = float(np.max(np.abs(t * d)))
        x, r, rnorm = x_new, r_new, rnorm_new
        if rnorm <= cfg.residual_tol:
            return _make_outcome(problem, SolveStatus.CONVERGED, x, it, cfg)
        if step_norm <= cfg.step_tol:
            # Stagnated: steps no longer move the iterate but the residual
            # never came down.
            return _make_outcome(problem, SolveStatus.LINE_SEARCH_FAILED, x, it, cfg)
    return _make_outcome(problem, SolveStatus.MAX_ITERS, x, cfg.max_iters, cfg)


def fixed_point_map(problem, vec) -> np.ndarray:
    """One application of the comparison map: solve A w = b(v).

    b carries the clamped boundary flux of the input iterate on boundary
    rows and zeros at interior rows.  Requires the problem to carry cutoff
    parameters.  For systems the two components decouple given the input.
    """
    grid = problem.grid
    A = assemble_linear_operator(grid)
    bpos = boundary_positions(grid)
    if isinstance(problem, SingleProblem):
        if problem.cutoff is None:
            raise ValueError("fixed-point map needs cutoff parameters")
        v = unknown_vector(grid, vec)
        flux = problem.lam * cutoff_eval(problem.f, problem.cutoff, v[bpos])
        return solve_linear(A, flux_rhs(grid, flux))
    if problem.cutoffs is None:
        raise ValueError("fixed-point map needs cutoff parameters")
    uvec, vvec = split_system_vector(grid, vec)
    cf, cg = problem.cutoffs
    flux_u = problem.lam * cutoff_eval(problem.f, cf, vvec[bpos])
    flux_v = problem.lam * cutoff_eval(problem.g, cg, uvec[bpos])
    w_u = solve_linear(A, flux_rhs(grid, flux_u))
    w_v = solve_linear(A, flux_rhs(grid, flux_v))
    return np.concatenate([w_u, w_v])


def supersolution_vector(problem) -> np.ndarray:
    """Two-level supersolution as an unknown vector (stacked for systems)."""
    grid = problem.grid
    n = unknown_indices(grid).size
    bpos = boundary_positions(grid)

    def levels(K):
        interior, boundary = supersolution_level(K, grid.ndim, grid.h_star_min)
        w = np.full(n, interior)
        w[bpos] = boundary
        return w

    if isinstance(problem, SingleProblem):
        if problem.cutoff is None:
            raise ValueError("supersolution needs cutoff parameters")
        return levels(problem.cutoff.K)
    if problem.cutoffs is None:
        raise ValueError("supersolution needs cutoff parameters")
    return np.concatenate([levels(c.K) for c in problem.cutoffs])


def fixed_point_solve(problem, cfg: NewtonConfig | None = None) -> SolveOutcome:
    """Iterate the comparison map from the supersolution down to a fixed point.

    Every iterate must stay inside the bracket [0, supersolution] entrywise;
    leaving it is an invariant breach and raises RuntimeError.  Converged
    means both the step and the re-evaluated clamped residual are below
    their tolerances.
    """
    cfg = cfg or NewtonConfig()
    upper = supersolution_vector(problem)
    slack = 1e-12 * float(np.max(upper))
    w = upper.copy()
    for it in range(1, cfg.max_iters + 1):
        w_new = fixed_point_map(problem, w)
        if not np.all(np.isfinite(w_new)):
            return _make_outcome(problem, SolveStatus.DIVERGED, w, it, cfg)
        if np.any(w_new < -slack) or np.any(w_new > upper + slack):
            raise RuntimeError(
                "fixed-point iterate left the bracket [0, supersolution]; "
                "monotonicity of the comparison map is broken"
            )
        step = float(np.max(np.abs(w_new - w)))
        w = w_new
        if step <= cfg.step_tol:
            res = float(np.max(np.abs(_residual(problem, w))))
            if res <= cfg.residual_tol:
                return _make_outcome(problem, SolveStatus.CONVERGED, w, it, cfg)
    return _make_outcome(problem, SolveStatus.MAX_ITERS, w, cfg.max_iters, cfg)


def _component_views(problem, vec):
    grid = problem.grid
    if isinstance(problem, SingleProblem):
        return [unknown_vector(grid, vec)]
    return list(split_system_vector(grid, vec))


def _apriori_cap(problem) -> float:
    """Bound used by the a-priori certificate; inf when no component is
    superlinear (the bound argument needs superlinear growth)."""
    if isinstance(problem, SingleProblem):
        polys = [problem.f]
    else:
        polys = [problem.f, problem.g]
    caps = []
    for p in polys:
        if not p.is_superlinear():
            return math.inf
        caps.append(apriori_bound(p, problem.lam, problem.grid.h_star_min))
    return max(caps)


def verify_certificates(problem, solution, cfg: NewtonConfig | None = None) -> Certificates:
    """Qualitative checks on a converged solution (see module docstring)."""
    cfg = cfg or NewtonConfig()
    grid = problem.grid
    comps = _component_views(problem, solution)
    bpos = boundary_positions(grid)
    floor = cfg.positivity_floor

    global_max = max(float(np.max(np.abs(c))) for c in comps)
    trivial = global_max < floor

    if trivial:
        positive = False
        max_on_boundary = True
        apriori_ok = True
    else:
        positive = all(float(np.min(c)) >= floor for c in comps)
        max_on_boundary = True
        for c in comps:
            cmax = float(np.max(c))
            bmax = float(np.max(c[bpos]))
            if bmax < cmax - 1e-12 * max(1.0, abs(cmax)):
                max_on_boundary = False
        cap = _apriori_cap(problem)
        signed_max = max(float(np.max(c)) for c in comps)
        apriori_ok = signed_max <= cap + 1e-8

    if isinstance(problem, SingleProblem):
        pairs = [(problem.f, problem.cutoff, comps[0][bpos])]
    else:
        cf, cg = problem.cutoffs if problem.cutoffs is not None else (None, None)
        # u-rows clamp f at v-values and vice versa.
        pairs = [(problem.f, cf, comps[1][bpos]), (problem.g, cg, comps[0][bpos])]
    inactive = True
    for poly, cut, vals in pairs:
        if cut is not None and not cutoff_inactive(poly, cut, vals):
            inactive = False

    return Certificates(positive, max_on_boundary, apriori_ok, inactive)
