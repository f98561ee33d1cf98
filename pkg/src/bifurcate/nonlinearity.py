"""Polynomial boundary-flux nonlinearities, cutoff clamping, and growth bounds.

Every experiment uses a polynomial flux f(s) = sum c_k s^k with nonnegative
values on [0, inf).  Restricting to polynomials keeps derivatives exact (the
Newton solver wants them) and makes the superlinearity data trivially
readable: growth exponent p = degree, leading constant b = top coefficient.

``cutoff_eval`` clamps f into the band [rho/lambda, K/(lambda h*)], which is
what makes the sub/supersolution bracket of the fixed-point solver work; the
a-priori bound ``apriori_bound`` gives the level above which f(s)/s exceeds
1/(lambda h_*) so any nonnegative discrete solution stays below it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with ascending coefficients: f(s) = sum coeffs[k] s^k."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        coeffs = [float(c) for c in coeffs]
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        if not coeffs:
            coeffs = [0.0]
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self) -> float:
        return self.coeffs[-1]

    def derivative_at_zero(self) -> float:
        return self.coeffs[1] if len(self.coeffs) > 1 else 0.0

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0.0,))
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def is_superlinear(self) -> bool:
        return self.degree >= 2 and self.leading_coefficient > 0

    def __call__(self, s):
        return eval_poly(self, s)


def eval_poly(f: Polynomial, s):
    """Horner evaluation of f; accepts scalars or arrays."""
    s = np.asarray(s, dtype=float)
    out = np.full_like(s, f.coeffs[-1])
    for c in f.coeffs[-2::-1]:
        out = out * s + c
    return float(out) if out.ndim == 0 else out


def eval_poly_deriv(f: Polynomial, s):
    """Horner evaluation of f'."""
    return eval_poly(f.derivative(), s)


@dataclass(frozen=True)
class CutoffParams:
    """Clamp band parameters: values of f are clipped to [rho/lam, K/(lam*h_star_max)]."""

    rho: float
    K: float
    lam: float
    h_star_max: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        if self.K <= 0:
            raise ValueError(f"K must be positive, got {self.K}")
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.h_star_max <= 0:
            raise ValueError(f"h_star_max must be positive, got {self.h_star_max}")
        if self.lower_clamp > self.upper_clamp:
            raise ValueError(
                f"lower clamp rho/lambda = {self.lower_clamp} exceeds upper clamp "
                f"K/(lambda h*) = {self.upper_clamp}; need rho <= K/h*"
            )

    @property
    def lower_clamp(self) -> float:
        return self.rho / self.lam

    @property
    def upper_clamp(self) -> float:
        return self.K / (self.lam * self.h_star_max)


def cutoff_eval(f: Polynomial, params: CutoffParams, s):
    """Clamped flux: f(s) clipped into [rho/lam, K/(lam h*)]; s must be >= 0."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("cutoff flux is only defined for nonnegative arguments")
    raw = eval_poly(f, s_arr)
    out = np.clip(raw, params.lower_clamp, params.upper_clamp)
    return float(out) if np.ndim(out) == 0 else out


def cutoff_deriv(f: Polynomial, params: CutoffParams, s):
    """Derivative of the clamped flux; zero on the clamped branches."""
    s_arr = np.asarray(s, dtype=float)
    raw = eval_poly(f, s_arr)
    d = eval_poly_deriv(f, s_arr)
    active = (raw > params.lower_clamp) & (raw < params.upper_clamp)
    out = np.where(active, d, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def cutoff_inactive(f: Polynomial, params: CutoffParams, boundary_values) -> bool:
    """True iff the clamp changes nothing at any of the supplied boundary values.

    When true, a solution of the clamped problem is also a solution of the
    unmodified discrete problem.
    """
    vals = np.atleast_1d(np.asarray(boundary_values, dtype=float))
    if vals.size == 0:
        return True
    raw = eval_poly(f, vals)
    clamped = np.clip(raw, params.lower_clamp, params.upper_clamp)
    return bool(np.all(raw == clamped))


def apriori_bound(f: Polynomial, lam: float, h_star_min: float) -> float:
    """Smallest C >= 0 with f(s)/s > 1/(lam*h_star_min) for all s > C.

    Located by doubling an upper bracket until the inequality holds there
    and bisecting down to relative tolerance 1e-12.  If the excess
    g(s) = f(s) - s/(lam*h_star_min) never changes sign on (0, S] the bound
    is the largest real root of g (a tangency), found from the companion
    matrix instead.
    """
    if not f.is_superlinear():
        raise ValueError("a-priori bound requires superlinear growth "
                         "(degree >= 2 with positive leading coefficient)")
    if lam <= 0 or h_star_min <= 0:
        raise ValueError("lambda and h_star_min must be positive")
    threshold = 1.0 / (lam * h_star_min)

    def excess(s):
        return eval_poly(f, s) - threshold * s

    hi = 1.0
    while excess(hi) <= 0 or eval_poly(f, 2 * hi) <= threshold * 2 * hi:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("no finite a-priori bound found")
    lo = None
    probe = hi / 2.0
    while probe > hi * 2.0**-80:
        if excess(probe) <= 0:
            lo = probe
            break
        probe /= 2.0
    if lo is None:
        # g > 0 on the whole scanned range: either C = 0 or a tangency root.
        c = _largest_real_root(f, threshold)
        return max(c, 0.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, abs(hi)):
            break
    c = 0.5 * (lo + hi)
    # Guard against a second sign change above the bracket (wiggly f).
    top = _largest_real_root(f, threshold)
    return max(c, top, 0.0)


def _largest_real_root(f: Polynomial, threshold: float) -> float:
    coeffs = list(f.coeffs)
    while len(coeffs) < 2:
        coeffs.append(0.0)
    coeffs[1] -= threshold
    roots = np.roots(list(reversed(coeffs)))
    real = [r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r))]
    positive = [r for r in real if r > 0]
    return max(positive) if positive else 0.0


def supersolution_level(K: float, ndim: int, h_star_min: float) -> tuple[float, float]:
    """Levels (interior, boundary) of the two-level supersolution.

    Interior level 2*N*K/h_*^2, boundary level the same plus K.
    """
    if K <= 0:
        raise ValueError(f"K must be positive, got {K}")
    interior = 2.0 * ndim * K / (h_star_min * h_star_min)
    return interior, interior + K
