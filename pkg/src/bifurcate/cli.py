"""Command-line front end: ``bifurcate <mode> --config <path> [--set k=v ...] --out <dir>``.

Modes
-----
* ``eigen``: print the principal eigenvalue data for the configured
  nonlinearities and write the sampled eigenfunction profile(s) as CSV.
* ``solve``: one nonlinear solve at the configured lambda (Newton or, for
  clamped problems, the monotone fixed-point iteration); writes the solution
  profile and prints the certificate record.
* ``trace``: run a full sweep protocol and write the bifurcation curve
  (one row per branch point) plus optional per-point profile files.
* ``check``: structural diagnostics on a small instance: sign pattern and
  inverse nonnegativity of the linear operator, truncation-order ratio
  tests, and certificate verification on a reference solve.

The config is a JSON file (or the name of a shipped preset, fig1..fig8);
any scalar field can be overridden with ``--set dotted.key=value``.  Every
run writes the fully resolved configuration next to its outputs so runs are
reproducible byte for byte.  Exit codes: 0 success, 1 numerical failure,
2 configuration error.

CSV schemas
-----------
* curve:   branch_id, lambda, max_u[, max_v], iters, residual,
           positive, max_on_boundary, apriori_ok, cutoff_inactive
* profile: x, u[, v]
* eigen:   x, phi[, psi]

Floats are printed with 17 significant digits, which round-trips IEEE
doubles exactly.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .assembly import SingleProblem, SystemProblem, assemble_linear_operator, with_lambda
from .continuation import (
    ConstantProfile,
    EigenfunctionProfile,
    Regime,
    detect_bifurcation_lambda,
    small_branch_amplitude,
    trace_full_curve,
)
from .eigen import (
    eigenfunction_single,
    eigenfunction_system,
    lambda1_single,
    lambda1_system,
)
from .grid import Domain, GridFunction, build_grid, normal_derivative, second_diff
from .nonlinearity import CutoffParams, Polynomial, apriori_bound
from .solve import NewtonConfig, fixed_point_solve, newton_solve, verify_certificates


class ConfigError(Exception):
    def __init__(self, fieldname: str, message: str):
        super().__init__(f"{fieldname}: {message}")
        self.fieldname = fieldname


def fmt(x) -> str:
    """17-significant-digit float formatting (exact double round-trip)."""
    return format(float(x), ".17g")


DEFAULT_CONFIG = {
    "problem": "single",
    "domain": [0.0, 1.0],
    "M": 101,
    "f_coeffs": None,
    "g_coeffs": None,
    "lambda": 1.0,
    "sweep": {
        "lambda_min": 0.01,
        "lambda_max": None,
        "delta_lambda": 0.001,
        "delta_offset": None,
        "regime": None,
        "initial": "eigenfunction",
        "amplitude": 1.0,
        "constant_level": 1.0,
    },
    "solve": {
        "method": "newton",
        "initial": "eigenfunction",
        "amplitude": 1.0,
        "constant_level": 1.0,
    },
    "newton": {
        "residual_tol": 1e-6,
        "step_tol": 1e-6,
        "max_iters": 100,
        "positivity_floor": 1e-12,
    },
    "cutoff": {"enabled": False, "rho": 0.0, "K": "auto"},
    "output": {"profiles": False, "profile_stride": 1},
}


def available_presets() -> list[str]:
    pdir = resources.files("bifurcate").joinpath("presets")
    return sorted(p.name[:-5] for p in pdir.iterdir() if p.name.endswith(".json"))


def load_config(spec: str) -> dict:
    """Load a config from a JSON path or a shipped preset name."""
    path = Path(spec)
    if path.exists():
        raw = json.loads(path.read_text())
    else:
        pres = resources.files("bifurcate").joinpath("presets", f"{spec}.json")
        if not pres.is_file():
            raise ConfigError(
                "config", f"{spec!r} is neither a file nor a preset "
                f"(presets: {', '.join(available_presets())})"
            )
        raw = json.loads(pres.read_text())
    return merge_config(raw)


def merge_config(raw: dict) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    for key, value in raw.items():
        if key in cfg and isinstance(cfg[key], dict) and isinstance(value, dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    return cfg


def apply_overrides(cfg: dict, sets: list[str]) -> dict:
    for item in sets:
        if "=" not in item:
            raise ConfigError("--set", f"expected key=value, got {item!r}")
        key, _, value = item.partition("=")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = parsed
    return cfg


def _require(cfg: dict, fieldname: str):
    node = cfg
    for part in fieldname.split("."):
        if not isinstance(node, dict) or part not in node or node[part] is None:
            raise ConfigError(fieldname, "required field is missing")
        node = node[part]
    return node


def build_problem(cfg: dict):
    """Grid + problem object from a validated config; resolves "auto" K."""
    kind = _require(cfg, "problem")
    if kind not in ("single", "system"):
        raise ConfigError("problem", f"must be 'single' or 'system', got {kind!r}")
    dom = _require(cfg, "domain")
    if np.isscalar(dom[0]):
        dom = [dom]
    counts = _require(cfg, "M")
    if np.isscalar(counts):
        counts = [counts]
    try:
        grid = build_grid(Domain(dom), counts)
    except ValueError as exc:
        raise ConfigError("domain/M", str(exc)) from exc

    f = Polynomial(_require(cfg, "f_coeffs"))
    lam = float(_require(cfg, "lambda"))
    if lam <= 0:
        raise ConfigError("lambda", "must be positive")

    cut_cfg = cfg.get("cutoff", {})
    cutoff = None
    if cut_cfg.get("enabled", False):
        K = cut_cfg.get("K", "auto")
        if K == "auto":
            if not f.is_superlinear():
                raise ConfigError("cutoff.K", "auto needs a superlinear f")
            K = apriori_bound(f, lam, grid.h_star_min) * grid.h_star_max / grid.h_star_min
        cut_cfg["K"] = float(K)
        cutoff = CutoffParams(
            rho=float(cut_cfg.get("rho", 0.0)),
            K=float(K),
            lam=lam,
            h_star_max=grid.h_star_max,
        )

    if kind == "single":
        return SingleProblem(grid, f, lam, cutoff)

    g = Polynomial(_require(cfg, "g_coeffs"))
    cutoffs = None
    if cutoff is not None:
        cutoffs = (cutoff, cutoff)
    return SystemProblem(grid, f, g, lam, cutoffs)


def build_newton_config(cfg: dict) -> NewtonConfig:
    n = cfg.get("newton", {})
    try:
        return NewtonConfig(
            residual_tol=float(n.get("residual_tol", 1e-6)),
            step_tol=float(n.get("step_tol", 1e-6)),
            max_iters=int(n.get("max_iters", 100)),
            positivity_floor=float(n.get("positivity_floor", 1e-12)),
        )
    except ValueError as exc:
        raise ConfigError("newton", str(exc)) from exc


def build_guess(cfg: dict, section: str):
    s = cfg.get(section, {})
    initial = s.get("initial", "eigenfunction")
    if initial == "eigenfunction":
        return EigenfunctionProfile(s.get("amplitude", 1.0))
    if initial == "constant":
        return ConstantProfile(float(s.get("constant_level", 1.0)))
    raise ConfigError(f"{section}.initial", f"unknown initial guess {initial!r}")


def _write_resolved(cfg: dict, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "resolved_config.json").write_text(
        json.dumps(cfg, indent=2, sort_keys=True) + "\n"
    )


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _profile_rows(grid, *arrays) -> list[list[str]]:
    x = grid.axes[0]
    return [[fmt(x[i])] + [fmt(a[i]) for a in arrays] for i in range(x.size)]


def run_eigen(cfg: dict, outdir: Path) -> int:
    problem = build_problem(cfg)
    grid = problem.grid
    _write_resolved(cfg, outdir)
    x = grid.axes[0]
    if isinstance(problem, SingleProblem):
        fp0 = problem.f.derivative_at_zero()
        lam1 = lambda1_single(fp0)
        if math.isinf(lam1):
            print("lambda1: infinite (no finite bifurcation point; f'(0) = 0)")
        else:
            print(f"lambda1: {fmt(lam1)}")
            print(f"mu1:     {fmt(lam1 * fp0)}")
            print(f"coeffs:  A = 1, B = {fmt(-lam1 * fp0)}")
        phi = eigenfunction_single(x)
        _write_csv(outdir / "eigen.csv", ["x", "phi"], _profile_rows(grid, phi))
    else:
        fp0 = problem.f.derivative_at_zero()
        gp0 = problem.g.derivative_at_zero()
        res = lambda1_system(fp0, gp0)
        if not res.finite:
            print("lambda1: infinite (no finite bifurcation point; f'(0) g'(0) = 0)")
            phi, psi = np.cosh(x), np.sinh(x)
        else:
            print(f"lambda1: {fmt(res.lambda1)}")
            print(f"mu1:     {fmt(res.mu1)}")
            print(f"coeffs:  A = 1, C = {fmt(res.C)}")
            phi, psi = eigenfunction_system(x, res, 1.0)
        _write_csv(outdir / "eigen.csv", ["x", "phi", "psi"],
                   _profile_rows(grid, phi, psi))
    print(f"wrote {outdir / 'eigen.csv'}")
    return 0


def run_solve(cfg: dict, outdir: Path) -> int:
    problem = build_problem(cfg)
    ncfg = build_newton_config(cfg)
    _write_resolved(cfg, outdir)
    method = cfg.get("solve", {}).get("method", "newton")
    if method == "fixed_point":
        outcome = fixed_point_solve(problem, ncfg)
    elif method == "newton":
        from .continuation import build_initial_vector

        guess = build_initial_vector(problem, build_guess(cfg, "solve"))
        outcome = newton_solve(problem, guess, ncfg)
    else:
        raise ConfigError("solve.method", f"unknown method {method!r}")

    print(f"status:   {outcome.status.value}")
    print(f"iters:    {outcome.iters}")
    print(f"residual: {fmt(outcome.final_residual_norm)}")
    if outcome.u is not None:
        print(f"max_u:    {fmt(outcome.u.max_norm())}")
        arrays = [outcome.u.values]
        header = ["x", "u"]
        if outcome.v is not None:
            print(f"max_v:    {fmt(outcome.v.max_norm())}")
            arrays.append(outcome.v.values)
            header.append("v")
        _write_csv(outdir / "profile.csv", header,
                   _profile_rows(problem.grid, *arrays))
        print(f"wrote {outdir / 'profile.csv'}")
    if outcome.certificates is not None:
        c = outcome.certificates
        print(f"certificates: positive={c.positive} max_on_boundary={c.max_on_boundary} "
              f"apriori_ok={c.apriori_ok} cutoff_inactive={c.cutoff_inactive}")
    return 0 if outcome.converged else 1


def _bool(b: bool) -> str:
    return "true" if b else "false"


def write_curve_csv(path: Path, branches, is_system: bool) -> None:
    header = ["branch_id", "lambda", "max_u"]
    if is_system:
        header.append("max_v")
    header += ["iters", "residual", "positive", "max_on_boundary",
               "apriori_ok", "cutoff_inactive"]
    rows = []
    for bid, branch in enumerate(branches):
        for p in branch.points:
            row = [str(bid), fmt(p.lam), fmt(p.max_u)]
            if is_system:
                row.append(fmt(p.max_v))
            c = p.certificates
            row += [str(p.iters), fmt(p.residual_norm), _bool(c.positive),
                    _bool(c.max_on_boundary), _bool(c.apriori_ok),
                    _bool(c.cutoff_inactive)]
            rows.append(row)
    _write_csv(path, header, rows)


def parse_regime(cfg: dict) -> Regime:
    regime_name = _require(cfg, "sweep.regime")
    try:
        return Regime(regime_name)
    except ValueError as exc:
        raise ConfigError(
            "sweep.regime",
            f"unknown regime {regime_name!r} "
            f"(one of {[r.value for r in Regime]})") from exc


def trace_from_config(cfg: dict):
    """Problem and traced branches for a validated trace config."""
    problem = build_problem(cfg)
    ncfg = build_newton_config(cfg)
    sw = cfg.get("sweep", {})
    regime = parse_regime(cfg)
    guess = build_guess(cfg, "sweep")
    branches = trace_full_curve(
        problem, regime, ncfg,
        lambda_min=float(sw.get("lambda_min", 0.01)),
        lambda_max=None if sw.get("lambda_max") is None else float(sw["lambda_max"]),
        delta_lambda=float(sw.get("delta_lambda", 1e-3)),
        delta_offset=None if sw.get("delta_offset") is None else float(sw["delta_offset"]),
        initial_guess=guess,
    )
    return problem, branches


def run_trace(cfg: dict, outdir: Path) -> int:
    problem = build_problem(cfg)
    sw = cfg.get("sweep", {})
    regime = parse_regime(cfg)
    guess = build_guess(cfg, "sweep")

    # Resolve the auto amplitude once, at the protocol's starting lambda,
    # and echo it so reruns are exactly reproducible from the config.
    if isinstance(guess, EigenfunctionProfile) and guess.amplitude == "auto_small":
        lam1 = _principal_lambda_of(problem)
        delta = sw.get("delta_offset")
        if delta is None:
            delta = max(float(sw.get("delta_lambda", 1e-3)), 1e-3)
        start = float(sw["lambda_max"]) if regime is Regime.NO_FINITE_BIFURCATION \
            else lam1 - float(delta)
        amps = small_branch_amplitude(with_lambda(problem, start), start)
        cfg["sweep"]["amplitude_resolved"] = list(amps)
    _write_resolved(cfg, outdir)

    try:
        problem, branches = trace_from_config(cfg)
    except ValueError as exc:
        print(f"trace failed: {exc}", file=sys.stderr)
        return 1

    is_system = isinstance(problem, SystemProblem)
    write_curve_csv(outdir / "curve.csv", branches, is_system)
    print(f"wrote {outdir / 'curve.csv'}")

    out_cfg = cfg.get("output", {})
    if out_cfg.get("profiles", False):
        stride = max(1, int(out_cfg.get("profile_stride", 1)))
        pdir = outdir / "profiles"
        pdir.mkdir(parents=True, exist_ok=True)
        for bid, branch in enumerate(branches):
            for idx, p in enumerate(branch.points):
                if idx % stride and idx != len(branch.points) - 1:
                    continue
                arrays = [p.profile_u]
                header = ["x", "u"]
                if p.profile_v is not None:
                    arrays.append(p.profile_v)
                    header.append("v")
                _write_csv(pdir / f"profile_{bid:02d}_{idx:05d}.csv", header,
                           _profile_rows(problem.grid, *arrays))
        print(f"wrote {pdir}/")

    for bid, branch in enumerate(branches):
        t = branch.termination
        msg = f"branch {bid} [{branch.label}]: {len(branch.points)} points, {t.kind.value}"
        if t.lambda_star is not None:
            msg += f" (lambda* = {fmt(t.lambda_star)}, lambda_L = {fmt(t.lambda_last)})"
        if t.lam is not None:
            msg += f" (at lambda = {fmt(t.lam)})"
        print(msg)

    if regime is Regime.SUBCRITICAL and len(branches) > 1 and branches[1].points:
        try:
            lam_det = detect_bifurcation_lambda(branches[1])
            print(f"detected bifurcation lambda: {fmt(lam_det)}")
        except ValueError:
            pass
    return 0


def _principal_lambda_of(problem) -> float:
    if isinstance(problem, SingleProblem):
        return lambda1_single(problem.f.derivative_at_zero())
    return lambda1_system(problem.f.derivative_at_zero(),
                          problem.g.derivative_at_zero()).lambda1


def zmatrix_report(A_dense: np.ndarray) -> dict:
    off = A_dense - np.diag(np.diag(A_dense))
    return {
        "offdiag_nonpositive": bool(np.all(off <= 0)),
        "diag_positive": bool(np.all(np.diag(A_dense) > 0)),
        "inverse_min_entry": float(np.min(np.linalg.inv(A_dense))),
    }


def truncation_ratio_report(domain=(0.0, 1.0), m: int = 51) -> dict:
    """Max-node errors of the second difference (against cosh'') and the
    boundary normal derivative (against the true normal slope) for cosh on
    nested grids; consecutive error ratios expose the convergence orders."""
    errs2, errsn, hs = [], [], []
    for counts in (m, 2 * m - 1, 4 * m - 3):
        g = build_grid(Domain([domain]), [counts])
        u = GridFunction.from_callable(g, np.cosh)
        x = g.axes[0]
        e2 = max(
            abs(second_diff(u, 0, (i,)) - math.cosh(x[i]))
            for i in range(1, counts - 1)
        )
        true_left = -math.sinh(x[0])
        true_right = math.sinh(x[-1])
        en = max(
            abs(normal_derivative(u, (0,)) - true_left),
            abs(normal_derivative(u, (counts - 1,)) - true_right),
        )
        errs2.append(e2)
        errsn.append(en)
        hs.append(g.spacings[0])
    return {
        "h": hs,
        "second_diff_errors": errs2,
        "normal_errors": errsn,
        "second_diff_ratios": [errs2[i] / errs2[i + 1] for i in range(len(errs2) - 1)],
        "normal_ratios": [errsn[i] / errsn[i + 1] for i in range(len(errsn) - 1)],
    }


def run_check(cfg: dict, outdir: Path) -> int:
    problem = build_problem(cfg)
    grid = problem.grid
    n = grid.num_nodes
    if n > 64:
        raise ConfigError("M", f"check mode needs at most 64 nodes, got {n}")
    _write_resolved(cfg, outdir)
    ok = True

    A = assemble_linear_operator(grid)
    dense = A.to_dense() if hasattr(A, "to_dense") else A.toarray()
    zrep = zmatrix_report(dense)
    for name, passed in (
        ("Z-matrix sign pattern", zrep["offdiag_nonpositive"] and zrep["diag_positive"]),
        ("inverse entrywise nonnegative", zrep["inverse_min_entry"] >= -1e-12),
    ):
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}")

    trep = truncation_ratio_report()
    r2 = trep["second_diff_ratios"]
    rn = trep["normal_ratios"]
    p2 = all(3.6 <= r <= 4.4 for r in r2)
    pn = all(1.8 <= r <= 2.2 for r in rn)
    ok &= p2 and pn
    print(f"[{'PASS' if p2 else 'FAIL'}] second-difference ratio test "
          f"({', '.join(f'{r:.3f}' for r in r2)}; expect ~4)")
    print(f"[{'PASS' if pn else 'FAIL'}] normal-derivative ratio test "
          f"({', '.join(f'{r:.3f}' for r in rn)}; expect ~2)")

    from .continuation import build_initial_vector

    guess = build_initial_vector(problem, ConstantProfile(0.5))
    outcome = newton_solve(problem, guess, build_newton_config(cfg))
    if outcome.converged:
        c = verify_certificates(problem, outcome.vector, build_newton_config(cfg))
        passed = c.max_on_boundary and c.apriori_ok and c.cutoff_inactive
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] reference solve certificates "
              f"(positive={c.positive}, max_on_boundary={c.max_on_boundary}, "
              f"apriori_ok={c.apriori_ok}, cutoff_inactive={c.cutoff_inactive})")
    else:
        ok = False
        print(f"[FAIL] reference solve did not converge ({outcome.status.value})")

    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bifurcate",
        description="Finite-difference bifurcation toolkit for elliptic "
                    "problems with superlinear boundary flux.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("eigen", "solve", "trace", "check"):
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True,
                       help="JSON config path or preset name (fig1..fig8)")
        p.add_argument("--set", action="append", default=[], dest="sets",
                       metavar="KEY=VALUE", help="override a config field")
        p.add_argument("--out", default="out", help="output directory")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.sets)
        cfg["mode"] = args.mode
        outdir = Path(args.out)
        runner = {
            "eigen": run_eigen,
            "solve": run_solve,
            "trace": run_trace,
            "check": run_check,
        }[args.mode]
        return runner(cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
