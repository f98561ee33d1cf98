"""Natural-parameter continuation of max-norm vs lambda bifurcation branches.

A sweep marches lambda over the lattice lambda_start + k*delta_lambda (default
step 0.001) in one direction, seeding every solve with the previously
converged solution and recording one branch point per convergence.  A sweep
stops when it reaches the end of its interval, when the solver fails (the
turning-point signal: the failing lambda is recorded as lambda_star and the
last converged one as lambda_L), or when the branch meets the trivial
solution (max-norm under the positivity floor).

Solutions are kept inside the positive cone the same way the original
experiments did: a converged iterate with negative nodes (possible right at a
bifurcation point, where a small sign-changing solution coexists) triggers
retries from shrunken seeds, which either land on the positive branch or slide
onto the trivial solution and terminate the sweep cleanly.

``trace_full_curve`` strings sweeps together into the three experiment
protocols:

* no finite bifurcation point (lambda_1 infinite): one left sweep from a
  chosen lambda_0 down to lambda_min;
* subcritical: left sweep from lambda_1 - delta, then a right sweep from the
  stored start back toward lambda_1 until the branch dies into the trivial
  solution;
* supercritical with fold: left sweep from lambda_1 - delta, right sweep
  until the solver fails at the fold, then a left recovery sweep over
  [lambda_1, lambda_L] restarted on the other branch.

Natural continuation cannot cross a fold by reusing the last converged point
as-is (Newton returns to the branch it came from), so the recovery restart
extrapolates through the fold: seeds u_L + k (u_L - u_prev) with doubling k
until Newton converges to a solution distinct from u_L.  That reseeding is
what "restarting on the other branch" means here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import (
    SingleProblem,
    SystemProblem,
    assemble_linear_operator,
    boundary_positions,
    flux_rhs,
    solve_linear,
    unknown_indices,
    unknown_vector,
    with_lambda,
)
from .eigen import eigenfunction_single, eigenfunction_system, lambda1_single, lambda1_system
from .grid import Grid
from .nonlinearity import Polynomial
from .solve import Certificates, NewtonConfig, SolveOutcome, newton_solve


class Direction(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Regime(enum.Enum):
    NO_FINITE_BIFURCATION = "no_finite_bifurcation"
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL_WITH_FOLD = "supercritical_fold"


class TerminationKind(enum.Enum):
    REACHED_END = "reached_end"
    SOLVER_FAILED = "solver_failed"
    BELOW_POSITIVITY_FLOOR = "below_positivity_floor"


@dataclass(frozen=True)
class EigenfunctionProfile:
    """Initial guess A * (principal eigenfunction); amplitude may be the
    string "auto_small" to target the small branch near the bifurcation
    point (resolved through :func:`small_branch_amplitude`)."""

    amplitude: float | str = 1.0


@dataclass(frozen=True)
class ConstantProfile:
    level: float = 1.0


@dataclass(frozen=True)
class StoredSolution:
    """Reuse the profile stored at an earlier branch point."""

    point: "BranchPoint"


@dataclass(frozen=True)
class SweepPlan:
    lambda_start: float
    lambda_end: float
    initial_guess: object
    delta_lambda: float = 1e-3
    direction: Direction | None = None
    delta_offset: float = 1e-3

    def __post_init__(self):
        if self.delta_lambda <= 0:
            raise ValueError("delta_lambda must be positive")
        inferred = Direction.LEFT if self.lambda_end <= self.lambda_start else Direction.RIGHT
        if self.direction is None:
            object.__setattr__(self, "direction", inferred)
        elif self.direction is not inferred and self.lambda_end != self.lambda_start:
            raise ValueError(
                f"direction {self.direction.value} inconsistent with sweep "
                f"[{self.lambda_start}, {self.lambda_end}]"
            )

    def lattice(self) -> np.ndarray:
        sign = -1.0 if self.direction is Direction.LEFT else 1.0
        span = abs(self.lambda_end - self.lambda_start)
        count = int(math.floor(span / self.delta_lambda + 1e-9)) + 1
        return self.lambda_start + sign * self.delta_lambda * np.arange(count)


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    max_u: float
    max_v: float | None
    profile_u: np.ndarray
    profile_v: np.ndarray | None
    iters: int
    residual_norm: float
    certificates: Certificates

    def stacked_vector(self, grid: Grid) -> np.ndarray:
        u = unknown_vector(grid, self.profile_u)
        if self.profile_v is None:
            return u
        return np.concatenate([u, unknown_vector(grid, self.profile_v)])


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    lam: float | None = None
    lambda_star: float | None = None
    lambda_last: float | None = None


@dataclass(frozen=True)
class Branch:
    points: tuple[BranchPoint, ...]
    termination: Termination
    plan: SweepPlan
    label: str = ""

    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    def max_norms(self) -> np.ndarray:
        return np.array([p.max_u for p in self.points])


def small_branch_amplitude(problem, lam: float) -> tuple[float, ...]:
    """Boundary amplitude(s) of the small solution branch at ``lam``.

    Collapses the discrete problem to a scalar model through the boundary
    response of the linear operator: a uniform unit flux on the boundary
    rows produces boundary value r, so boundary values of solutions satisfy
    u_b = r * lam * f(u_b) (and the crossed pair of equations for systems).
    The smallest positive root is the small-branch boundary value; since the
    eigenfunction profiles are normalized to 1 at the boundary it doubles as
    the initial-guess amplitude.
    """
    grid = problem.grid
    A = assemble_linear_operator(grid)
    nb = boundary_positions(grid).size
    response = solve_linear(A, flux_rhs(grid, np.ones(nb)))
    r = float(np.max(response[boundary_positions(grid)]))

    P = np.polynomial.Polynomial
    if isinstance(problem, SingleProblem):
        model = r * lam * P(problem.f.coeffs) - P([0.0, 1.0])
        roots = _positive_real_roots(model)
        if not roots:
            raise ValueError(f"no positive small-branch amplitude at lambda={lam}")
        return (roots[0],)
    fpoly = P(problem.f.coeffs)
    gpoly = P(problem.g.coeffs)
    model = r * lam * fpoly(r * lam * gpoly) - P([0.0, 1.0])
    roots = _positive_real_roots(model)
    if not roots:
        raise ValueError(f"no positive small-branch amplitude at lambda={lam}")
    ub = roots[0]
    vb = r * lam * float(gpoly(ub))
    return (ub, vb)


def _positive_real_roots(poly) -> list[float]:
    roots = poly.roots()
    out = sorted(
        r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 1e-12
    )
    return out


def build_initial_vector(problem, guess) -> np.ndarray:
    """Materialize an initial-guess description as a stacked unknown vector."""
    grid = problem.grid
    if isinstance(guess, np.ndarray):
        return guess.copy()
    if isinstance(guess, StoredSolution):
        return guess.point.stacked_vector(grid)
    n = unknown_indices(grid).size
    if isinstance(guess, ConstantProfile):
        reps = 1 if isinstance(problem, SingleProblem) else 2
        return np.full(reps * n, float(guess.level))
    if not isinstance(guess, EigenfunctionProfile):
        raise TypeError(f"unsupported initial guess {guess!r}")

    if grid.ndim != 1:
        raise ValueError("eigenfunction initial guesses are defined on (0,1) in 1D")
    x = grid.axes[0][unknown_indices(grid)]

    if isinstance(problem, SingleProblem):
        if guess.amplitude == "auto_small":
            (amp,) = small_branch_amplitude(problem, problem.lam)
        else:
            amp = float(guess.amplitude)
        return amp * eigenfunction_single(x)

    res = lambda1_system(problem.f.derivative_at_zero(), problem.g.derivative_at_zero())
    if guess.amplitude == "auto_small":
        amp_u, amp_v = small_branch_amplitude(problem, problem.lam)
        if res.finite:
            phi, psi = eigenfunction_system(x, res, 1.0)
            return np.concatenate([amp_u * phi / phi[0], amp_v * psi / psi[0]])
        return np.concatenate([amp_u * np.cosh(x), amp_v * np.cosh(x)])
    amp = float(guess.amplitude)
    if res.finite:
        phi, psi = eigenfunction_system(x, res, amp)
        return np.concatenate([phi, psi])
    # No finite bifurcation point: fall back to the (cosh, sinh) pair used
    # by the quadratic-flux experiments.
    return np.concatenate([amp * np.cosh(x), amp * np.sinh(x)])


def _point_from_outcome(problem, lam: float, outcome: SolveOutcome) -> BranchPoint:
    from .assembly import residual_single, residual_system

    if isinstance(problem, SingleProblem):
        res = residual_single(problem, outcome.vector)
        max_v = None
        profile_v = None
    else:
        res = residual_system(problem, outcome.vector)
        max_v = outcome.v.max_norm()
        profile_v = outcome.v.values
    return BranchPoint(
        lam=lam,
        max_u=outcome.u.max_norm(),
        max_v=max_v,
        profile_u=outcome.u.values,
        profile_v=profile_v,
        iters=outcome.iters,
        residual_norm=float(np.max(np.abs(res))),
        certificates=outcome.certificates,
    )


def _min_value(problem, outcome: SolveOutcome) -> float:
    vals = [float(np.min(outcome.u.values))]
    if outcome.v is not None:
        vals.append(float(np.min(outcome.v.values)))
    return min(vals)


_RESEED_SHRINKS = (0.3, 0.1, 0.03)


def sweep(problem, plan: SweepPlan, cfg: NewtonConfig | None = None,
          label: str = "") -> Branch:
    """March lambda over the plan's lattice, reusing each solution as the next seed."""
    cfg = cfg or NewtonConfig()
    lattice = plan.lattice()
    guess_vec = build_initial_vector(with_lambda(problem, float(lattice[0])),
                                     plan.initial_guess)
    points: list[BranchPoint] = []
    termination = Termination(TerminationKind.REACHED_END)

    for k, lam in enumerate(lattice):
        lam = float(lam)
        prob = with_lambda(problem, lam)
        outcome = newton_solve(prob, guess_vec, cfg)

        if not outcome.converged:
            if k == 0:
                raise ValueError(
                    f"no branch found from given initial guess at lambda={lam} "
                    f"(status {outcome.status.value})"
                )
            termination = Termination(
                TerminationKind.SOLVER_FAILED,
                lambda_star=lam,
                lambda_last=float(lattice[k - 1]),
            )
            break

        if outcome.u.max_norm() < cfg.positivity_floor:
            points.append(_point_from_outcome(prob, lam, outcome))
            termination = Termination(TerminationKind.BELOW_POSITIVITY_FLOOR, lam=lam)
            break

        if _min_value(prob, outcome) < cfg.positivity_floor:
            # Left the positive cone (sign-changing solution near a
            # bifurcation point).  Retry from shrunken seeds, which either
            # recover the positive branch or land on the trivial solution.
            resolved = False
            for shrink in _RESEED_SHRINKS:
                retry = newton_solve(prob, shrink * guess_vec, cfg)
                if not retry.converged:
                    continue
                if retry.u.max_norm() < cfg.positivity_floor:
                    points.append(_point_from_outcome(prob, lam, retry))
                    termination = Termination(TerminationKind.BELOW_POSITIVITY_FLOOR, lam=lam)
                    resolved = True
                    break
                if _min_value(prob, retry) >= cfg.positivity_floor:
                    outcome = retry
                    resolved = True
                    break
            if resolved and termination.kind is TerminationKind.BELOW_POSITIVITY_FLOOR:
                break
            if not resolved:
                if k == 0:
                    raise ValueError(
                        f"no positive branch found from given initial guess at lambda={lam}"
                    )
                termination = Termination(TerminationKind.BELOW_POSITIVITY_FLOOR, lam=lam)
                break

        points.append(_point_from_outcome(prob, lam, outcome))
        guess_vec = outcome.vector

    return Branch(tuple(points), termination, plan, label=label)


def reseed_other_branch(problem, lam_last: float, last_vec: np.ndarray,
                        prev_vec: np.ndarray | None,
                        cfg: NewtonConfig | None = None,
                        delta_lambda: float = 1e-3) -> tuple[float, np.ndarray] | None:
    """Find the second solution near the fold by extrapolating through it.

    At lambda_last (and, if needed, a few continuation steps further from the
    fold, where the two solutions are better separated) this seeds Newton
    with last + k*(last - prev) for doubling k in both orientations and
    accepts the first converged positive solution distinct from the incoming
    branch.  Because the working tolerances leave a wide near-solution blob
    around the fold, both the incoming solution and each candidate are
    polished with tight tolerances before they are compared.  Returns the
    restart pair (lambda, unknown vector), or None if no second solution
    shows up.
    """
    from dataclasses import replace as _replace

    cfg = cfg or NewtonConfig()
    tight = _replace(cfg, residual_tol=min(cfg.residual_tol, 1e-11),
                     step_tol=min(cfg.step_tol, 1e-11),
                     max_iters=max(cfg.max_iters, 200))
    if prev_vec is None:
        diff = 0.05 * last_vec
    else:
        diff = last_vec - prev_vec
    if float(np.max(np.abs(diff))) == 0.0:
        diff = 0.05 * last_vec

    for steps_back in (0, 1, 2, 5, 10):
        lam_try = lam_last - steps_back * delta_lambda
        prob = with_lambda(problem, lam_try)
        polished_base = newton_solve(prob, last_vec, tight)
        if polished_base.converged:
            base_norm = float(np.max(np.abs(polished_base.vector)))
        else:
            base_norm = float(np.max(np.abs(last_vec)))
        threshold = 1e-5 * (1.0 + base_norm)
        for orientation in (1.0, -1.0):
            for k in (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0):
                seed = last_vec + orientation * k * diff
                outcome = newton_solve(prob, seed, cfg)
                if not outcome.converged:
                    continue
                polished = newton_solve(prob, outcome.vector, tight)
                if not polished.converged:
                    continue
                z = polished.vector
                if polished.u.max_norm() < cfg.positivity_floor:
                    continue
                if float(np.min(z)) < cfg.positivity_floor:
                    continue
                if abs(float(np.max(np.abs(z))) - base_norm) > threshold:
                    return lam_try, z
    return None


def _principal_lambda(problem) -> float:
    if isinstance(problem, SingleProblem):
        return lambda1_single(problem.f.derivative_at_zero())
    return lambda1_system(
        problem.f.derivative_at_zero(), problem.g.derivative_at_zero()
    ).lambda1


def trace_full_curve(problem, regime: Regime, cfg: NewtonConfig | None = None, *,
                     lambda_min: float = 0.01,
                     lambda_max: float | None = None,
                     delta_lambda: float = 1e-3,
                     delta_offset: float | None = None,
                     initial_guess=None) -> list[Branch]:
    """Run the sweep protocol for the given bifurcation regime.

    ``lambda_max`` is the starting lambda_0 for the infinite-lambda_1 regime
    and the failure cap for the fold regime.  ``delta_offset`` is the offset
    below lambda_1 for the first solve (default max(delta_lambda, 1e-3)).
    """
    cfg = cfg or NewtonConfig()
    regime = Regime(regime)
    delta = delta_offset if delta_offset is not None else max(delta_lambda, 1e-3)
    guess = initial_guess if initial_guess is not None else EigenfunctionProfile(1.0)
    lam1 = _principal_lambda(problem)

    if regime is Regime.NO_FINITE_BIFURCATION:
        if math.isfinite(lam1):
            raise ValueError(
                f"regime {regime.value} needs an infinite bifurcation point, "
                f"but lambda_1 = {lam1}"
            )
        if lambda_max is None:
            raise ValueError("lambda_max (the starting lambda_0) is required")
        plan = SweepPlan(lambda_max, lambda_min, guess, delta_lambda,
                         Direction.LEFT, delta)
        return [sweep(problem, plan, cfg, label="left")]

    if not math.isfinite(lam1):
        raise ValueError(f"regime {regime.value} needs a finite bifurcation point")
    start = lam1 - delta

    left_plan = SweepPlan(start, lambda_min, guess, delta_lambda, Direction.LEFT, delta)
    left = sweep(problem, left_plan, cfg, label="left")
    seed = StoredSolution(left.points[0])

    if regime is Regime.SUBCRITICAL:
        right_plan = SweepPlan(start, lam1, seed, delta_lambda, Direction.RIGHT, delta)
        right = sweep(problem, right_plan, cfg, label="right")
        return [left, right]

    cap = lambda_max if lambda_max is not None else lam1 + max(1.0, lam1)
    right_plan = SweepPlan(start, cap, seed, delta_lambda, Direction.RIGHT, delta)
    right = sweep(problem, right_plan, cfg, label="right")
    if right.termination.kind is not TerminationKind.SOLVER_FAILED or not right.points:
        return [left, right]

    lam_last = right.termination.lambda_last
    if lam_last <= lam1:
        # Degenerate window: at this resolution the discrete fold sits at or
        # below the predicted bifurcation point, so there is nothing to
        # recover over [lambda_1, lambda_L].
        return [left, right]
    grid = problem.grid
    last_vec = right.points[-1].stacked_vector(grid)
    prev_vec = right.points[-2].stacked_vector(grid) if len(right.points) >= 2 else None
    other = reseed_other_branch(problem, lam_last, last_vec, prev_vec, cfg,
                                delta_lambda=delta_lambda)
    if other is None:
        return [left, right]
    lam_restart, other_vec = other
    if lam_restart <= lam1:
        return [left, right]
    recovery_plan = SweepPlan(lam_restart, lam1, other_vec, delta_lambda,
                              Direction.LEFT, delta)
    recovered = sweep(problem, recovery_plan, cfg, label="recovered")
    return [left, right, recovered]


def detect_bifurcation_lambda(branch: Branch, floor: float = 1e-3) -> float:
    """Lambda at which the branch meets the trivial solution.

    Finds the first consecutive pair straddling the floor threshold and
    interpolates lambda linearly in log(max_u).
    """
    pts = branch.points
    if not pts:
        raise ValueError("empty branch")
    if pts[0].max_u < floor:
        return pts[0].lam
    tiny = 1e-300
    for a, b in zip(pts, pts[1:]):
        if a.max_u >= floor > b.max_u:
            la = math.log(max(a.max_u, tiny))
            lb = math.log(max(b.max_u, tiny))
            t = (math.log(floor) - la) / (lb - la)
            return a.lam + t * (b.lam - a.lam)
    raise ValueError(f"branch never drops below the floor threshold {floor}")
