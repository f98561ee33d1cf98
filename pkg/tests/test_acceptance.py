"""End-to-end acceptance suite.

Each test covers one numbered acceptance criterion, prints a PASS/FAIL line
(run with ``pytest -s tests/test_acceptance.py`` to see them all), and then
asserts every clause.  The traces behind criteria 6 through 9 are the
shipped preset configurations, so this module exercises exactly what the
command line runs.

Two clauses are asserted as specified although the mathematics forces them
to fail; the inline comments state why.  Everything else is green.
"""

import math
import tempfile
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from bifurcate import (
    CutoffParams,
    Domain,
    NewtonConfig,
    Polynomial,
    SingleProblem,
    SystemProblem,
    TerminationKind,
    apriori_bound,
    assemble_linear_operator,
    build_grid,
    detect_bifurcation_lambda,
    fixed_point_map,
    fixed_point_solve,
    jacobian_single,
    jacobian_system,
    lambda1_single,
    lambda1_system,
    newton_solve,
    residual_single,
    residual_system,
)
from bifurcate.assembly import with_lambda
from bifurcate.cli import load_config, trace_from_config, write_curve_csv
from bifurcate.continuation import EigenfunctionProfile, build_initial_vector
from bifurcate.grid import GridFunction, normal_derivative, second_diff
from bifurcate.solve import supersolution_vector

from conftest import central_fd_jacobian, dense, max_relative_entry_error

TANH_HALF = math.tanh(0.5)


def report(num, name, clauses):
    ok = all(passed for _, passed in clauses)
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {name}")
    for cname, passed in clauses:
        print(f"    {'ok  ' if passed else 'FAIL'}  {cname}")
    failed = [cname for cname, passed in clauses if not passed]
    assert not failed, f"criterion {num} failed: {failed}"


def trace_preset(name):
    cfg = load_config(name)
    problem, branches = trace_from_config(cfg)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "curve.csv"
        write_curve_csv(path, branches, isinstance(problem, SystemProblem))
        curve = path.read_bytes()
    return SimpleNamespace(name=name, problem=problem, branches=branches, curve=curve)


@pytest.fixture(scope="module")
def fig1():
    return trace_preset("fig1")


@pytest.fixture(scope="module")
def fig2():
    return trace_preset("fig2")


@pytest.fixture(scope="module")
def fig3():
    return trace_preset("fig3")


@pytest.fixture(scope="module")
def fig4():
    return trace_preset("fig4")


@pytest.fixture(scope="module")
def fig5():
    return trace_preset("fig5")


@pytest.fixture(scope="module")
def fig6():
    return trace_preset("fig6")


def test_criterion_01_eigenvalue_exactness_single():
    closed = lambda fp: (math.cosh(1.0) - 1.0) / (fp * math.sinh(1.0))
    got2 = lambda1_single(2.0)
    got01 = lambda1_single(0.1)
    report(1, "single-equation principal eigenvalue", [
        ("lambda1(2) within 5e-9 of closed form", abs(got2 - closed(2.0)) <= 5e-9),
        ("lambda1(2) matches reported digits 0.23105858", abs(got2 - 0.23105858) <= 5e-9),
        ("lambda1(0.1) within 5e-9 of closed form", abs(got01 - closed(0.1)) <= 5e-9),
        ("lambda1(0.1) matches reported digits 4.62117157", abs(got01 - 4.62117157) <= 5e-9),
    ])


def test_criterion_02_quartic_identity_system():
    clauses = []
    for sigma in (0.01, 0.1, 1.0, 4.0, 100.0):
        fp = math.sqrt(sigma)
        lam1 = lambda1_system(fp, fp).lambda1
        clauses.append((f"sigma={sigma}: |lambda1*sqrt(sigma) - tanh(1/2)| <= 1e-10",
                        abs(lam1 * math.sqrt(sigma) - TANH_HALF) <= 1e-10))
    for c in (0.1, 1.0, 2.0):
        clauses.append((f"system(c,c) matches single(c) at c={c} to 1e-10",
                        abs(lambda1_system(c, c).lambda1 - lambda1_single(c)) <= 1e-10))
    # Reported digits 4.620403752506588 for sigma = 0.01 deviate from the
    # exact root by ~7.7e-4; the implementation follows the formula.
    deviation = abs(lambda1_system(0.1, 0.1).lambda1 - 4.620403752506588)
    clauses.append(("documented deviation of reported digits (~8e-4)",
                    5e-4 < deviation < 1e-3))
    report(2, "system quartic identity", clauses)


def test_criterion_03_m_matrix_properties():
    clauses = []
    for m in range(4, 21):
        g = build_grid(Domain([(0.0, 1.0)]), [m])
        A = dense(assemble_linear_operator(g))
        off = A - np.diag(np.diag(A))
        zmat = bool(np.all(off <= 0) and np.all(np.diag(A) > 0))
        inv_ok = bool(np.min(np.linalg.inv(A)) >= -1e-12)
        clauses.append((f"M={m}: Z-matrix and nonnegative inverse", zmat and inv_ok))
    report(3, "linear operator is an M-matrix", clauses)


def test_criterion_04_jacobian_correctness():
    rng = np.random.default_rng(20240809)
    g = build_grid(Domain([(0.0, 1.0)]), [16])
    single = SingleProblem(g, Polynomial([0, 0.1, -0.1, 1.0]), 1.3)
    cut = CutoffParams(rho=0.1, K=0.4, lam=1.3, h_star_max=g.h_star_max)
    clipped = SingleProblem(g, Polynomial([0, 2, 1]), 1.3, cut)
    system = SystemProblem(g, Polynomial([0, 1, 1]), Polynomial([0, 0, 1]), 0.9)

    def check(problem, residual, jacobian, n):
        worst = 0.0
        for _ in range(20):
            x = rng.uniform(0.1, 2.0, n)
            Ja = dense(jacobian(problem, x))
            Jf = central_fd_jacobian(lambda w: residual(problem, w), x)
            worst = max(worst, max_relative_entry_error(Ja, Jf))
        return worst

    w1 = check(single, residual_single, jacobian_single, 16)
    w2 = check(clipped, residual_single, jacobian_single, 16)
    w3 = check(system, residual_system, jacobian_system, 32)
    report(4, "analytic Jacobians vs central differences", [
        (f"single (worst rel err {w1:.2e})", w1 <= 1e-5),
        (f"single with clamp (worst rel err {w2:.2e})", w2 <= 1e-5),
        (f"system (worst rel err {w3:.2e})", w3 <= 1e-5),
    ])


def test_criterion_05_truncation_orders():
    errs2, errsn = [], []
    for m in (51, 101, 201):  # h = 1/50, 1/100, 1/200
        g = build_grid(Domain([(0.0, 1.0)]), [m])
        u = GridFunction.from_callable(g, np.cosh)
        x = g.axes[0]
        errs2.append(max(abs(second_diff(u, 0, (i,)) - math.cosh(x[i]))
                         for i in range(1, m - 1)))
        errsn.append(max(abs(normal_derivative(u, (0,)) - 0.0),
                         abs(normal_derivative(u, (m - 1,)) - math.sinh(1.0))))
    clauses = []
    for coarse, fine in zip(errs2, errs2[1:]):
        r = coarse / fine
        clauses.append((f"interior second-difference ratio {r:.3f} in [3.6, 4.4]",
                        3.6 <= r <= 4.4))
    for coarse, fine in zip(errsn, errsn[1:]):
        r = coarse / fine
        clauses.append((f"boundary normal-derivative ratio {r:.3f} in [1.8, 2.2]",
                        1.8 <= r <= 2.2))
    report(5, "truncation orders on cosh", clauses)


def test_criterion_06_figure1_bifurcation_from_infinity(fig1):
    (branch,) = fig1.branches
    mus = branch.max_norms()
    expected_points = int(math.floor((3.0 - 0.01) / 0.001 + 1e-9)) + 1
    report(6, "quadratic flux, M=151: branch from infinity", [
        ("every lattice point converged (full sweep, clean end)",
         branch.termination.kind is TerminationKind.REACHED_END
         and len(branch.points) == expected_points),
        ("max_u strictly decreasing in lambda", bool(np.all(np.diff(mus) > 0))),
        ("max_u(0.01) >= 100 * max_u(3)", mus[-1] >= 100.0 * mus[0]),
        ("all certificates pass at every point",
         all(p.certificates.all_passed() for p in branch.points)),
        ("every stored residual re-verified <= 1e-6",
         all(p.residual_norm <= 1e-6 for p in branch.points)),
    ])


def test_criterion_07_figure2_subcritical(fig2):
    left, right = fig2.branches
    lam1 = lambda1_single(2.0)
    lam_det = detect_bifurcation_lambda(right)
    # Probe above lambda1 with small eigenfunction guesses; tight tolerances
    # distinguish genuine positive solutions from near-kernel remnants that
    # would pass a 1e-6 residual check.
    tight = NewtonConfig(residual_tol=1e-12, step_tol=1e-12, max_iters=300)
    probe_ok = True
    for amp in (1e-2, 1e-3, 1e-4):
        prob = with_lambda(fig2.problem, lam1 + 0.05)
        out = newton_solve(prob, build_initial_vector(prob, EigenfunctionProfile(amp)), tight)
        if out.converged and out.certificates.positive:
            probe_ok = False
    report(7, "quadratic-plus-linear flux, M=175: subcritical branch", [
        ("left sweep reaches lambda_min",
         left.termination.kind is TerminationKind.REACHED_END),
        ("right sweep meets the trivial solution",
         min(p.max_u for p in right.points) < 1e-3),
        (f"detected bifurcation {lam_det:.6f} within 0.02 of 0.23105858",
         abs(lam_det - 0.23105858) <= 0.02),
        ("no converged positive solution at lambda1 + 0.05 from small guesses",
         probe_ok),
    ])


def test_criterion_08_figure3_supercritical_fold(fig3):
    branches = fig3.branches
    lam1 = lambda1_single(0.1)
    clauses = [("three sweeps traced (left, right, recovered)", len(branches) == 3)]
    if len(branches) == 3:
        left, right, recovered = branches
        t = right.termination
        lower = {round(p.lam, 9): p.max_u for p in right.points}
        shared = [(p.max_u, lower[round(p.lam, 9)])
                  for p in recovered.points
                  if round(p.lam, 9) in lower and lam1 < p.lam < t.lambda_last]
        big_gaps = sum(1 for hi, lo in shared if abs(hi - lo) >= 1e-3)
        clauses += [
            ("right sweep fails at a turning point",
             t.kind is TerminationKind.SOLVER_FAILED),
            (f"lambda1 < lambda* (= {t.lambda_star:.6f})", lam1 < t.lambda_star),
            (f"lambda_L = {t.lambda_last:.6f} in [4.62, 4.85]",
             4.62 <= t.lambda_last <= 4.85),
            ("upper branch recovered (above the lower one at shared lambdas)",
             len(shared) > 0 and all(hi > lo for hi, lo in shared)),
            (f"two solutions differ by >= 1e-3 at {big_gaps} >= 10 lambdas in "
             "(lambda1, lambda_L)", big_gaps >= 10),
        ]
    report(8, "cubic flux, M=101: supercritical fold", clauses)


def test_criterion_09_systems(fig4, fig5, fig6):
    clauses = []

    # (a) equal quadratic fluxes: components coincide at every branch point
    (b4,) = fig4.branches
    sym_ok = all(
        float(np.max(np.abs(p.profile_u - p.profile_v))) <= 1e-8 * p.max_u
        for p in b4.points
    )
    clauses.append(("f = g = s^2: |u - v| <= 1e-8 * |u| at every branch point", sym_ok))

    # (b) equal quadratic-plus-linear fluxes: branch meets the trivial
    # solution near the predicted bifurcation point
    lam_det = detect_bifurcation_lambda(fig6.branches[1])
    clauses.append((f"f = g = s + s^2: detected bifurcation {lam_det:.6f} "
                    "within 0.02 of 0.46211716",
                    abs(lam_det - 0.46211716) <= 0.02))

    # (c) asserted as specified: v > u at every node.  This cannot hold:
    # with f(s) = s^2 + s > s^2 = g(s) and both increasing, v >= u would
    # give u's flux f(v) > g(u) = v's flux, forcing u > v -- so every
    # positive solution has u strictly above v.  The computed branches
    # confirm u > v at every node; the clause fails by construction.
    (b5,) = fig5.branches
    v_above_u = all(bool(np.all(p.profile_v > p.profile_u)) for p in b5.points)
    clauses.append(("f = s^2 + s, g = s^2: v > u at every node", v_above_u))

    report(9, "coupled-system reproductions", clauses)


def test_criterion_10_cutoff_fixed_point_machinery():
    g = build_grid(Domain([(0.0, 1.0)]), [101])
    f = Polynomial([0, 0, 1])
    cap = apriori_bound(f, 1.0, g.h_star_min)
    K = cap * g.h_star_max / g.h_star_min  # "auto" resolution
    cut = CutoffParams(rho=0.0, K=K, lam=1.0, h_star_max=g.h_star_max)
    problem = SingleProblem(g, f, 1.0, cut)
    cfg = NewtonConfig()

    outcome = fixed_point_solve(problem, cfg)

    upper = supersolution_vector(problem)
    bound = float(np.max(upper))
    w = upper.copy()
    in_bracket = True
    for _ in range(cfg.max_iters):
        w_new = fixed_point_map(problem, w)
        if np.any(w_new < -1e-9) or np.any(w_new > bound * (1 + 1e-12)):
            in_bracket = False
        step = float(np.max(np.abs(w_new - w)))
        w = w_new
        if step <= cfg.step_tol:
            break

    newton_out = newton_solve(problem, upper, cfg)
    agree = (outcome.converged and newton_out.converged
             and float(np.max(np.abs(outcome.vector - newton_out.vector))) <= 1e-6)

    # The clamp-inactivity clause cannot hold: iterating the comparison map
    # down from the supersolution stops at the largest fixed point of the
    # clamped problem, whose boundary flux sits exactly at the clamp ceiling
    # K/(lam h*) whenever that ceiling exceeds the true solution's flux
    # (here ceiling = 1e4 vs flux ~ 0.21).  The limit solves the clamped
    # problem but not the unclamped one; asserted as specified regardless.
    report(10, "clamped fixed-point machinery", [
        ("fixed-point iteration converges from the supersolution",
         outcome.converged),
        ("every iterate stays in [0, supersolution level]", in_bracket),
        ("limit passes the clamp-inactivity check",
         outcome.certificates is not None and outcome.certificates.cutoff_inactive),
        ("agrees with the Newton solve of the same clamped problem "
         "from the same start (<= 1e-6)", agree),
    ])


def test_criterion_11_determinism(fig1, fig2, fig3, fig4, fig5, fig6):
    clauses = []
    for fix in (fig1, fig2, fig3, fig4, fig5, fig6):
        rerun = trace_preset(fix.name)
        clauses.append((f"{fix.name}: repeated trace gives bitwise-identical CSV",
                        rerun.curve == fix.curve))
    report(11, "bitwise deterministic reruns", clauses)
