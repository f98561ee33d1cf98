"""Bifurcation diagrams for the three single-equation experiments.

* quadratic flux s^2: f'(0) = 0, so the only bifurcation is from infinity;
  a single left sweep traces the whole curve.
* 2s + s^2: subcritical bifurcation at lambda_1 ~ 0.2311; the branch
  connects infinity (lambda -> 0) to the trivial solution at lambda_1.
* 0.1s - 0.1s^2 + s^3: supercritical bifurcation with a fold; two positive
  solutions coexist between lambda_1 and the turning point, found by the
  failure-restart protocol (march right until the solver fails, reseed
  across the fold, sweep back).

Each run comes straight from the shipped preset configs, so these plots are
exactly what `bifurcate trace --config figN` computes.  The cubic case adds
one extra sweep seeded on the large branch to draw the full S-shape below
the bifurcation point.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from bifurcate import (
    EigenfunctionProfile,
    SweepPlan,
    lambda1_single,
    sweep,
)
from bifurcate.cli import load_config, trace_from_config

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))

styles = {"left": "C0.", "right": "C1.", "recovered": "C3."}

for ax, preset, title in [
    (axes[0], "fig1", "f(s) = s^2 (lambda_1 infinite)"),
    (axes[1], "fig2", "f(s) = 2s + s^2 (subcritical)"),
    (axes[2], "fig3", "f(s) = 0.1s - 0.1s^2 + s^3 (fold)"),
]:
    cfg = load_config(preset)
    problem, branches = trace_from_config(cfg)
    for b in branches:
        ax.plot(b.lambdas(), b.max_norms(), styles.get(b.label, "k."),
                ms=2, label=b.label)
        t = b.termination
        print(f"{preset} [{b.label}]: {len(b.points)} pts, {t.kind.value}"
              + (f", lambda_L = {t.lambda_last:.6f}" if t.lambda_last else ""))
    if preset == "fig3":
        # extra sweep on the large branch for the full picture below lambda_1
        lam1 = lambda1_single(0.1)
        plan = SweepPlan(lam1 - 0.001, 0.01, EigenfunctionProfile(1.0),
                         delta_lambda=0.001)
        big = sweep(problem, plan, label="infinity branch")
        ax.plot(big.lambdas(), big.max_norms(), "C2.", ms=2, label="infinity branch")
        ax.set_ylim(0, 0.5)
    ax.set_title(title, fontsize=9)
    ax.set_xlabel("lambda")
    ax.set_ylabel("max |u|")
    ax.legend(fontsize=7)

fig.tight_layout()
out = "demos/output/single_equation_curves.png"
fig.savefig(out, dpi=130)
print(f"wrote {out}")
