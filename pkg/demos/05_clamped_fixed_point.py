"""The clamped problem and its monotone fixed-point iteration, warts and all.

Clamping the boundary flux into [rho/lam, K/(lam h*)] makes the linear
comparison operator's M-matrix structure bite: iterating w <- A^{-1} b(w)
from the two-level supersolution produces a decreasing sequence trapped in
[0, supersolution], so a fixed point of the clamped problem always exists.

The catch, demonstrated below: for a superlinear flux the iteration's limit
is the LARGEST fixed point of the clamped problem, and as soon as the clamp
ceiling exceeds the true solution's boundary flux there is a spurious fixed
point pinned at the ceiling.  The monotone iteration therefore lands on the
ceiling profile (the clamp stays active there), not on the solution of the
unclamped problem -- which is why the production path solves the unclamped
system with Newton, and the clamp machinery serves as the admissibility
argument plus an after-the-fact check (``cutoff_inactive``).
"""

import numpy as np

from bifurcate import (
    CutoffParams,
    Domain,
    NewtonConfig,
    Polynomial,
    SingleProblem,
    apriori_bound,
    build_grid,
    eigenfunction_single,
    fixed_point_map,
    fixed_point_solve,
    newton_solve,
)
from bifurcate.solve import supersolution_vector

grid = build_grid(Domain([(0.0, 1.0)]), [101])
f = Polynomial([0, 0, 1])  # s^2
lam = 1.0

cap = apriori_bound(f, lam, grid.h_star_min)
K = cap * grid.h_star_max / grid.h_star_min
cut = CutoffParams(rho=0.0, K=K, lam=lam, h_star_max=grid.h_star_max)
problem = SingleProblem(grid, f, lam, cut)
print(f"a-priori bound C = {cap:.1f}, K = {K:.1f}, clamp ceiling K/(lam h*) = {cut.upper_clamp:.1f}")

upper = supersolution_vector(problem)
print(f"supersolution levels: interior {upper[1]:.1f}, boundary {upper[0]:.1f} (interior + K)")

w = upper.copy()
print("\nmonotone iteration from the supersolution:")
for k in range(1, 6):
    w_next = fixed_point_map(problem, w)
    in_bracket = bool(np.all(w_next >= -1e-9) and np.all(w_next <= upper * (1 + 1e-12)))
    step = float(np.max(np.abs(w_next - w)))
    w = w_next
    print(f"  k={k}: max w = {np.max(w):12.6g}   step = {step:10.4g}   in bracket: {in_bracket}")
    if step == 0.0:
        break

outcome = fixed_point_solve(problem)
print(f"\nfixed_point_solve: {outcome.status.value} in {outcome.iters} iterations, "
      f"residual {outcome.final_residual_norm:.2e}")
print(f"limit max value: {outcome.u.max_norm():.6g}")
print(f"clamp inactive at the limit? {outcome.certificates.cutoff_inactive}")
print("-> the limit solves the clamped problem exactly, but its boundary flux")
print("   sits at the ceiling, so it is NOT a solution of the unclamped problem.")

plain = SingleProblem(grid, f, lam)
newton = newton_solve(plain, eigenfunction_single(grid.axes[0]))
print(f"\nNewton on the unclamped problem: {newton.status.value}, "
      f"max u = {newton.u.max_norm():.6g}")
print(f"clamp inactive at Newton's solution? "
      f"{bool(np.all(f(newton.u.values[[0, -1]]) <= cut.upper_clamp))}")
print("the genuine solution fits comfortably inside the clamp band, so once")
print("found it is certified as a solution of both problems.")

rho_problem = SingleProblem(
    grid, f, lam, CutoffParams(rho=0.5, K=K, lam=lam, h_star_max=grid.h_star_max)
)
rho_out = fixed_point_solve(rho_problem)
print(f"\nwith a positive floor rho = 0.5 the limit is strictly positive: "
      f"min = {float(np.min(rho_out.u.values)):.6g}")
