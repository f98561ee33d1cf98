import numpy as np
import pytest

from bifurcate import Domain, GridFunction, build_grid


@pytest.fixture
def unit_grid_11():
    return build_grid(Domain([(0.0, 1.0)]), [11])


@pytest.fixture
def unit_grid_101():
    return build_grid(Domain([(0.0, 1.0)]), [101])


def grid_function(grid, fn):
    return GridFunction.from_callable(grid, fn)


def dense(A):
    return A.to_dense() if hasattr(A, "to_dense") else A.toarray()


def central_fd_jacobian(residual, x, step=1e-6):
    """Dense finite-difference Jacobian oracle."""
    x = np.asarray(x, dtype=float)
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (residual(x + e) - residual(x - e)) / (2 * step)
    return J


def max_relative_entry_error(Ja, Jf):
    scale = np.maximum(np.maximum(np.abs(Ja), np.abs(Jf)), 1.0)
    return float(np.max(np.abs(Ja - Jf) / scale))
