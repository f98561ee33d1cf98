import math

import numpy as np
import pytest

from bifurcate import (
    Domain,
    GridFunction,
    Polynomial,
    SingleProblem,
    build_grid,
    eigenfunction_single,
    eigenfunction_system,
    is_infinite,
    lambda1_single,
    lambda1_system,
    residual_single,
    solve_for_lambda_quadratic,
)
from bifurcate.eigen import quadratic_residual, quartic_residual

TANH_HALF = math.tanh(0.5)


class TestLambda1Single:
    def test_reference_values(self):
        # closed form (cosh(1)-1)/(f'(0) sinh(1))
        closed = lambda fp: (math.cosh(1) - 1) / (fp * math.sinh(1))
        assert lambda1_single(2.0) == pytest.approx(closed(2.0), abs=5e-9)
        assert lambda1_single(2.0) == pytest.approx(0.23105858, abs=5e-9)
        assert lambda1_single(0.1) == pytest.approx(4.62117157, abs=5e-9)

    def test_hyperbolic_identity(self):
        # (cosh 1 - 1)/sinh 1 = tanh(1/2)
        assert lambda1_single(1.0) == pytest.approx(TANH_HALF, abs=1e-14)

    def test_infinite_sentinel(self):
        assert is_infinite(lambda1_single(0.0))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            lambda1_single(-1.0)

    def test_root_residual(self):
        for fp in (0.1, 0.5, 1.0, 2.0, 10.0):
            lam = lambda1_single(fp)
            assert abs(quadratic_residual(lam, fp)) <= 1e-10 * max(1.0, abs(lam))


class TestQuadraticRoots:
    def test_both_roots_and_ordering(self):
        lo, hi = solve_for_lambda_quadratic(1.0)
        assert lo == pytest.approx(TANH_HALF, abs=1e-12)        # tanh(1/2)
        assert hi == pytest.approx(1.0 / TANH_HALF, abs=1e-12)  # coth(1/2)
        assert lo < hi

    def test_smaller_root_is_lambda1(self):
        lo, _ = solve_for_lambda_quadratic(2.0)
        assert lo == pytest.approx(0.23105858, abs=5e-9)

    @pytest.mark.parametrize("fp", [0.1, 0.7, 2.0, 5.0])
    def test_vieta_product(self, fp):
        lo, hi = solve_for_lambda_quadratic(fp)
        assert lo * hi == pytest.approx(1.0 / fp**2, rel=1e-12)


class TestEigenfunctionSingle:
    def test_endpoint_values(self):
        assert eigenfunction_single(0.0) == pytest.approx(1.0, abs=1e-15)
        # cosh(1) - (cosh(1)-1) = 1
        assert eigenfunction_single(1.0) == pytest.approx(1.0, abs=1e-14)

    def test_interior_minimum(self):
        # cosh(x) - tanh(1/2) sinh(x) has minimum 1/cosh(1/2) at x = 1/2
        assert eigenfunction_single(0.5) == pytest.approx(1 / math.cosh(0.5), abs=1e-13)
        assert eigenfunction_single(0.5) == pytest.approx(0.886819, abs=5e-7)

    def test_positive_and_normalized(self):
        x = np.linspace(0, 1, 1001)
        phi = eigenfunction_single(x)
        assert np.all(phi > 0)
        assert np.max(phi) == pytest.approx(1.0, abs=1e-14)
        assert phi[0] == phi[-1] == pytest.approx(1.0, abs=1e-14)

    def test_discrete_bvp_residual_first_order(self):
        # Sampled on a grid the eigenfunction satisfies the linearized
        # discrete problem up to O(h) (the boundary operator is first order).
        errs = []
        for m in (51, 101, 201):
            g = build_grid(Domain([(0.0, 1.0)]), [m])
            fp = 2.0
            lam1 = lambda1_single(fp)
            p = SingleProblem(g, Polynomial([0, fp]), lam1)
            r = residual_single(p, eigenfunction_single(g.axes[0]))
            errs.append(np.max(np.abs(r)))
        for coarse, fine in zip(errs, errs[1:]):
            assert 1.7 <= coarse / fine <= 2.3


class TestLambda1System:
    def test_symmetric_reference(self):
        res = lambda1_system(1.0, 1.0)
        assert res.lambda1 == pytest.approx(0.46211716, abs=5e-9)
        assert res.mu1 == pytest.approx(TANH_HALF, abs=1e-12)

    def test_infinite_sentinel(self):
        assert not lambda1_system(0.0, 0.0).finite
        assert not lambda1_system(1.0, 0.0).finite

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            lambda1_system(-0.1, 1.0)

    @pytest.mark.parametrize("sigma", [0.01, 0.1, 1.0, 4.0, 100.0])
    def test_scaling_identity(self, sigma):
        # substituting t = lam sqrt(sigma) factors the quartic; the smallest
        # positive root always satisfies lam1 sqrt(sigma) = tanh(1/2)
        fp = math.sqrt(sigma)
        res = lambda1_system(fp, fp)
        assert abs(res.lambda1 * math.sqrt(sigma) - TANH_HALF) <= 1e-10

    @pytest.mark.parametrize("c", [0.1, 0.5, 1.0, 2.0, 10.0])
    def test_cross_consistency_with_single(self, c):
        assert abs(lambda1_system(c, c).lambda1 - lambda1_single(c)) <= 1e-10

    @pytest.mark.parametrize("fp,gp", [(1, 1), (0.1, 0.1), (0.1, 1.0), (2.0, 0.5)])
    def test_quartic_residual_and_oracle(self, fp, gp):
        res = lambda1_system(fp, gp)
        sigma = fp * gp
        assert abs(quartic_residual(res.lambda1, sigma)) <= 1e-10
        # independent root-finder oracle on the quartic
        t1 = math.tanh(1.0)
        roots = np.roots([sigma**2, 0.0, (2 - 4 / t1**2) * sigma, 0.0, 1.0])
        pos = sorted(r.real for r in roots if abs(r.imag) < 1e-9 and r.real > 0)
        assert res.lambda1 == pytest.approx(pos[0], rel=1e-10)

    @pytest.mark.parametrize("sigma", [0.01, 0.1, 1.0, 4.0])
    def test_location_bound(self, sigma):
        fp = math.sqrt(sigma)
        res = lambda1_system(fp, fp)
        bound = math.sqrt((2 / math.tanh(1.0) ** 2 - 1) / sigma)
        assert res.lambda1 < bound

    def test_reported_digits_vs_exact_root(self):
        # The value 4.620403752506588 circulating for f'(0) = g'(0) = 0.1
        # sits ~7.7e-4 away from the exact quartic root; the implementation
        # follows the formula, so the deviation is expected and recorded.
        # For f'(0) = 0.1, g'(0) = 1 the reported 1.46134240 agrees with the
        # exact root to ~4e-7 (a numeric root-finder remnant).
        exact_cc = lambda1_system(0.1, 0.1).lambda1
        assert exact_cc == pytest.approx(TANH_HALF / 0.1, abs=1e-10)
        assert 5e-4 < abs(exact_cc - 4.620403752506588) < 1e-3
        exact_cq = lambda1_system(0.1, 1.0).lambda1
        assert exact_cq == pytest.approx(TANH_HALF / math.sqrt(0.1), abs=1e-10)
        assert abs(exact_cq - 1.46134240) < 1e-6

    def test_coefficient_ratio_at_lambda1(self):
        # the quartic relation collapses C/A to sqrt(g'(0)/f'(0))
        res = lambda1_system(0.1, 1.0)
        assert res.C == pytest.approx(math.sqrt(1.0 / 0.1), rel=1e-12)
        res2 = lambda1_system(2.0, 2.0)
        assert res2.C == pytest.approx(1.0, rel=1e-12)


class TestEigenfunctionSystem:
    def test_values_at_zero(self):
        res = lambda1_system(0.5, 2.0)
        phi0, psi0 = eigenfunction_system(0.0, res, amplitude=1.0)
        assert phi0 == pytest.approx(1.0, abs=1e-14)
        assert psi0 == pytest.approx(res.C, rel=1e-12)

    def test_equal_derivatives_make_components_proportional(self):
        res = lambda1_system(0.7, 0.7)
        x = np.linspace(0, 1, 201)
        phi, psi = eigenfunction_system(x, res, amplitude=1.0)
        assert np.allclose(psi, phi, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("sigma", [0.01, 0.1, 1.0, 4.0])
    def test_positivity_on_unit_interval(self, sigma):
        fp = math.sqrt(sigma)
        res = lambda1_system(fp, fp)
        x = np.arange(1e-3, 1.0, 1e-3)
        phi, psi = eigenfunction_system(x, res, amplitude=1.0)
        assert np.all(phi > 0)
        assert np.all(psi > 0)

    def test_infinite_case_rejected(self):
        res = lambda1_system(0.0, 1.0)
        with pytest.raises(ValueError):
            eigenfunction_system(0.5, res)
