"""Principal eigenvalues of the linearized problems on (0, 1).

Linearizing the single equation at the trivial solution gives the two-point
problem -p'' + p = 0 with p'(0) = -lam f'(0) p(0) and p'(1) = lam f'(0) p(1).
With p = A cosh + B sinh the boundary conditions collapse to the quadratic

    [f'(0)]^2 sinh(1) lam^2 - 2 f'(0) cosh(1) lam + sinh(1) = 0,

whose roots are (cosh(1) +- 1) / (f'(0) sinh(1)); the smaller one is the
principal eigenvalue

    lambda_1 = (cosh(1) - 1) / (f'(0) sinh(1)) = tanh(1/2) / f'(0),

with positive eigenfunction p1(x) = cosh(x) - tanh(1/2) sinh(x) (normalized
so max p1 = p1(0) = p1(1) = 1).  When f'(0) = 0 there is no finite
bifurcation point; that case is reported as the infinity sentinel.

For the coupled system the same reduction leads to a quartic in lambda,

    s^2 lam^4 + (2 - 4/tanh(1)^2) s lam^2 + 1 = 0,    s = f'(0) g'(0),

solved here exactly as a quadratic in lam^2.  Substituting t = lam sqrt(s)
factors the quartic into (t^2 - 2 coth(1) t + 1)(t^2 + 2 coth(1) t + 1), so
the smallest positive root always satisfies lam_1 sqrt(s) = tanh(1/2); that
identity is used as an independent cross-check in the tests, never as the
computation path.  The eigenfunction pair is

    phi(x) = A [cosh(x) - (1 + lam^2 s) tanh(1)/2 * sinh(x)]
    psi(x) = A [(1 + lam^2 s) tanh(1)/(2 lam f'(0)) * cosh(x)
                - lam g'(0) sinh(x)]

with the cosh-coefficient of psi written C = A (1 + lam^2 s) tanh(1) /
(2 lam f'(0)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INFINITE = math.inf


def is_infinite(lambda1: float) -> bool:
    return math.isinf(lambda1)


@dataclass(frozen=True)
class SingleEigenResult:
    """Principal eigenpair data for the single equation; B = -lam1 f'(0) A."""

    lambda1: float
    A: float
    B: float


@dataclass(frozen=True)
class SystemEigenResult:
    """Principal eigenpair data for the coupled system.

    sigma = f'(0) g'(0); mu1 = lambda1 * sqrt(sigma) is the underlying
    boundary (Steklov) eigenvalue; C is the cosh-coefficient of psi for
    amplitude A = 1.
    """

    lambda1: float
    sigma: float
    fprime0: float
    gprime0: float
    A: float
    C: float
    mu1: float

    @property
    def finite(self) -> bool:
        return not math.isinf(self.lambda1)


def lambda1_single(fprime0: float) -> float:
    """Principal eigenvalue (cosh(1)-1)/(f'(0) sinh(1)); inf when f'(0) = 0."""
    if fprime0 < 0:
        raise ValueError(f"f'(0) must be nonnegative, got {fprime0}")
    if fprime0 == 0:
        return INFINITE
    return (math.cosh(1.0) - 1.0) / (fprime0 * math.sinh(1.0))


def single_eigen_result(fprime0: float, amplitude: float = 1.0) -> SingleEigenResult:
    lam1 = lambda1_single(fprime0)
    if math.isinf(lam1):
        b = -math.tanh(0.5) * amplitude
    else:
        b = -lam1 * fprime0 * amplitude
    return SingleEigenResult(lam1, amplitude, b)


def solve_for_lambda_quadratic(fprime0: float) -> tuple[float, float]:
    """Both roots (cosh(1) -+ 1)/(f'(0) sinh(1)) of the boundary quadratic,
    ordered ascending; the first is the principal eigenvalue."""
    if fprime0 <= 0:
        raise ValueError(f"f'(0) must be positive, got {fprime0}")
    s1 = math.sinh(1.0)
    c1 = math.cosh(1.0)
    return (c1 - 1.0) / (fprime0 * s1), (c1 + 1.0) / (fprime0 * s1)


def eigenfunction_single(x):
    """cosh(x) - ((cosh(1)-1)/sinh(1)) sinh(x); positive on [0,1], max 1."""
    x = np.asarray(x, dtype=float)
    ratio = (math.cosh(1.0) - 1.0) / math.sinh(1.0)
    out = np.cosh(x) - ratio * np.sinh(x)
    return float(out) if out.ndim == 0 else out


def lambda1_system(fprime0: float, gprime0: float) -> SystemEigenResult:
    """Smallest positive root of the system quartic, solved as a quadratic
    in lambda^2; infinity sentinel when f'(0) g'(0) = 0."""
    if fprime0 < 0 or gprime0 < 0:
        raise ValueError(f"f'(0), g'(0) must be nonnegative, got {fprime0}, {gprime0}")
    sigma = fprime0 * gprime0
    if sigma == 0:
        return SystemEigenResult(INFINITE, sigma, fprime0, gprime0, 1.0, math.nan, INFINITE)
    t1 = math.tanh(1.0)
    # Quartic sigma^2 L^2 + (2 - 4/t1^2) sigma L + 1 = 0 in L = lambda^2.
    b = (2.0 - 4.0 / t1**2) * sigma
    disc = b * b - 4.0 * sigma * sigma
    # disc = sigma^2[(2 - 4/t^2)^2 - 4] > 0 always since 4/t^2 - 2 > 2.
    root_plus = (-b + math.sqrt(disc)) / (2.0 * sigma * sigma)
    root_minus = 1.0 / (sigma * sigma * root_plus)  # product of roots = 1/sigma^2
    lam1 = math.sqrt(root_minus)
    c_coeff = (1.0 + lam1 * lam1 * sigma) * t1 / (2.0 * lam1 * fprime0)
    mu1 = lam1 * math.sqrt(sigma)
    return SystemEigenResult(lam1, sigma, fprime0, gprime0, 1.0, c_coeff, mu1)


def eigenfunction_system(x, res: SystemEigenResult, amplitude: float = 1.0):
    """Eigenfunction pair (phi, psi) at the principal eigenvalue, scaled by
    ``amplitude``."""
    if not res.finite:
        raise ValueError("eigenfunction pair undefined at the infinite sentinel")
    x = np.asarray(x, dtype=float)
    lam = res.lambda1
    t1 = math.tanh(1.0)
    factor = 0.5 * (1.0 + lam * lam * res.sigma) * t1
    phi = amplitude * (np.cosh(x) - factor * np.sinh(x))
    psi = amplitude * (
        (factor / (lam * res.fprime0)) * np.cosh(x) - lam * res.gprime0 * np.sinh(x)
    )
    if phi.ndim == 0:
        return float(phi), float(psi)
    return phi, psi


def quartic_residual(lam: float, sigma: float) -> float:
    """Value of the system quartic at lam; zero at eigenvalues."""
    t1 = math.tanh(1.0)
    return sigma**2 * lam**4 + (2.0 - 4.0 / t1**2) * sigma * lam**2 + 1.0


def quadratic_residual(lam: float, fprime0: float) -> float:
    """Value of the single-equation boundary quadratic at lam."""
    return (
        fprime0**2 * math.sinh(1.0) * lam**2
        - 2.0 * fprime0 * math.cosh(1.0) * lam
        + math.sinh(1.0)
    )
