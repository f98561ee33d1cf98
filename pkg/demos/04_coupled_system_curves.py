"""Bifurcation diagrams for the coupled-system experiments.

The solution vector stacks the two components, and the coupling enters only
through the boundary rows: u's flux is lam*f(v), v's flux is lam*g(u).  The
five preset configurations cover the regimes:

* fig4  f = g = s^2          both derivatives vanish: bifurcation from
                             infinity only, and u = v identically.
* fig5  f = s^2 + s, g = s^2 still infinite lambda_1; the component fed by
                             the larger flux (u) dominates the other at
                             every node.
* fig6  f = g = s + s^2      subcritical branch meeting zero near
                             lambda_1 = tanh(1/2).
* fig7  f = g = cubic        supercritical fold; the recovery sweep finds
                             the second solution family.
* fig8  f = cubic, g = s+s^2 mixed case; at this resolution the discrete
                             fold sits a hair below the predicted
                             bifurcation point, so the right sweep fails
                             immediately and there is no window to recover.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from bifurcate.cli import load_config, trace_from_config

presets = ["fig4", "fig5", "fig6", "fig7", "fig8"]
fig, axes = plt.subplots(1, 5, figsize=(18, 3.4))

for ax, preset in zip(axes, presets):
    cfg = load_config(preset)
    problem, branches = trace_from_config(cfg)
    for b in branches:
        lams = b.lambdas()
        ax.plot(lams, b.max_norms(), ".", ms=2, label=f"{b.label}: max u")
        ax.plot(lams, [p.max_v for p in b.points], ".", ms=2, label=f"{b.label}: max v")
        print(f"{preset} [{b.label}]: {len(b.points)} pts, {b.termination.kind.value}")
    ax.set_title(f"{preset}: f={cfg['f_coeffs']}, g={cfg['g_coeffs']}", fontsize=7)
    ax.set_xlabel("lambda")
    ax.set_ylim(0, 8)
    ax.legend(fontsize=6)

    last = branches[0].points[-1]
    if last.max_v is not None and last.max_u > 1e-3:
        rel = np.max(np.abs(last.profile_u - last.profile_v)) / last.max_u
        print(f"   at lambda = {last.lam:.3f}: max|u - v| / max|u| = {rel:.2e}")

fig.tight_layout()
out = "demos/output/coupled_system_curves.png"
fig.savefig(out, dpi=130)
print(f"wrote {out}")
