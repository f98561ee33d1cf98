"""Assembly of the discrete nonlinear systems and the linear comparison operator.

For a grid function u on the tensor grid the discrete problem reads

    -lap_h u + u = 0                 at interior nodes,
    d*_h u . n - lam * f(u) = 0      at smooth-boundary nodes,

which in 1D with M nodes and spacing h is the classic set of rows

    F_1 = (u_1 - u_2)/h - lam f(u_1)
    F_i = -u_{i-1}/h^2 + (2/h^2 + 1) u_i - u_{i+1}/h^2      (1 < i < M)
    F_M = (u_M - u_{M-1})/h - lam f(u_M).

The coupled system stacks two copies w = (u; v) with the boundary fluxes
crossed: u-rows get lam*f(v), v-rows get lam*g(u).

Everything is expressed through one linear operator A per grid (interior
rows -lap_h + I, boundary rows the outward normal derivative), so that

    residual(u)  =  A u - flux(u)        (flux nonzero on boundary rows only)
    jacobian(u)  =  A - diag(lam f'(u))  (on boundary rows only).

A is a nonsingular M-matrix: all off-diagonal entries nonpositive, inverse
entrywise nonnegative.  That is what gives the fixed-point map its monotone
bracket.  Corner nodes (N >= 2) carry no equation; the unknown vector ranges
over interior plus smooth-boundary nodes and corner values are backfilled by
averaging their neighbors (see :func:`complete_with_corners`).

1D matrices are stored tridiagonally and solved with a banded direct solve;
systems and higher dimensions go through scipy.sparse.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse

from .grid import Grid, GridFunction
from .nonlinearity import (
    CutoffParams,
    Polynomial,
    cutoff_deriv,
    cutoff_eval,
    eval_poly,
    eval_poly_deriv,
)


@dataclass(frozen=True)
class SingleProblem:
    """One equation: parameter lam > 0, boundary flux lam*f(u) (optionally clamped)."""

    grid: Grid
    f: Polynomial
    lam: float
    cutoff: CutoffParams | None = None

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.cutoff is not None:
            _check_cutoff_consistent(self.cutoff, self.lam, self.grid)

    @property
    def num_unknowns(self) -> int:
        return unknown_indices(self.grid).size


@dataclass(frozen=True)
class SystemProblem:
    """Coupled pair: u-rows carry lam*f(v), v-rows carry lam*g(u)."""

    grid: Grid
    f: Polynomial
    g: Polynomial
    lam: float
    cutoffs: tuple[CutoffParams, CutoffParams] | None = None

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.cutoffs is not None:
            for c in self.cutoffs:
                _check_cutoff_consistent(c, self.lam, self.grid)

    @property
    def num_unknowns(self) -> int:
        return 2 * unknown_indices(self.grid).size


def _check_cutoff_consistent(cutoff: CutoffParams, lam: float, grid: Grid) -> None:
    if cutoff.lam != lam:
        raise ValueError(f"cutoff lambda {cutoff.lam} differs from problem lambda {lam}")
    if cutoff.h_star_max != grid.h_star_max:
        raise ValueError(
            f"cutoff h* {cutoff.h_star_max} differs from grid h* {grid.h_star_max}"
        )


def with_lambda(problem, lam: float):
    """Copy of the problem at a new parameter value, cutoff band retuned along."""
    if isinstance(problem, SingleProblem):
        cutoff = None
        if problem.cutoff is not None:
            cutoff = replace(problem.cutoff, lam=lam)
        return replace(problem, lam=lam, cutoff=cutoff)
    cutoffs = None
    if problem.cutoffs is not None:
        cutoffs = tuple(replace(c, lam=lam) for c in problem.cutoffs)
    return replace(problem, lam=lam, cutoffs=cutoffs)


class TridiagonalMatrix:
    """Tridiagonal matrix with a banded direct solve."""

    def __init__(self, lower, diag, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.diag = np.asarray(diag, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        n = self.diag.size
        if self.lower.size != n - 1 or self.upper.size != n - 1:
            raise ValueError("band lengths inconsistent with diagonal")

    @property
    def shape(self):
        n = self.diag.size
        return (n, n)

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        out = self.diag * x
        out[:-1] += self.upper * x[1:]
        out[1:] += self.lower * x[:-1]
        return out

    def solve(self, rhs):
        n = self.diag.size
        ab = np.zeros((3, n))
        ab[0, 1:] = self.upper
        ab[1, :] = self.diag
        ab[2, :-1] = self.lower
        return scipy.linalg.solve_banded((1, 1), ab, np.asarray(rhs, dtype=float))

    def to_dense(self):
        return (
            np.diag(self.diag)
            + np.diag(self.upper, 1)
            + np.diag(self.lower, -1)
        )

    def to_csr(self):
        return scipy.sparse.csr_matrix(self.to_coo())

    def to_coo(self):
        n = self.diag.size
        rows = np.concatenate([np.arange(n), np.arange(n - 1), np.arange(1, n)])
        cols = np.concatenate([np.arange(n), np.arange(1, n), np.arange(n - 1)])
        data = np.concatenate([self.diag, self.upper, self.lower])
        return scipy.sparse.coo_matrix((data, (rows, cols)), shape=(n, n))

    def with_diag_update(self, positions, deltas) -> "TridiagonalMatrix":
        diag = self.diag.copy()
        diag[positions] += deltas
        return TridiagonalMatrix(self.lower, diag, upper=self.upper)


def unknown_indices(grid: Grid) -> np.ndarray:
    """Flat indices of the nodes that carry an equation (corners excluded)."""
    return np.flatnonzero(grid.node_kinds() != 2)


@lru_cache(maxsize=32)
def _positions(grid: Grid):
    unknowns = unknown_indices(grid)
    pos = np.full(grid.num_nodes, -1, dtype=np.int64)
    pos[unknowns] = np.arange(unknowns.size)
    bidx = grid.smooth_boundary_indices()
    return unknowns, pos, bidx, pos[bidx]


def boundary_positions(grid: Grid) -> np.ndarray:
    """Positions of the smooth-boundary rows inside the unknown vector."""
    return _positions(grid)[3]


@lru_cache(maxsize=32)
def assemble_linear_operator(grid: Grid):
    """The matrix A: interior rows -lap_h + I, boundary rows d*_h . n.

    Returns a :class:`TridiagonalMatrix` in 1D and a CSR matrix otherwise.
    The right-hand side that pairs with it is zero at interior rows and the
    (clamped) boundary flux at boundary rows; see :func:`flux_rhs`.
    """
    if grid.ndim == 1:
        n = grid.counts[0]
        h = grid.spacings[0]
        diag = np.full(n, 2.0 / h**2 + 1.0)
        lower = np.full(n - 1, -1.0 / h**2)
        upper = np.full(n - 1, -1.0 / h**2)
        diag[0] = 1.0 / h
        upper[0] = -1.0 / h
        diag[-1] = 1.0 / h
        lower[-1] = -1.0 / h
        return TridiagonalMatrix(lower, diag, upper)

    unknowns, pos, _, _ = _positions(grid)
    kinds = grid.node_kinds()
    signs = grid.normal_signs()
    rows, cols, data = [], [], []
    for fi in unknowns:
        p = pos[fi]
        multi = grid.multi_index(fi)
        if kinds[fi] == 0:
            center = 1.0
            for ax in range(grid.ndim):
                h2 = grid.spacings[ax] ** 2
                center += 2.0 / h2
                for step in (-1, 1):
                    nb = list(multi)
                    nb[ax] += step
                    rows.append(p)
                    cols.append(pos[grid.flat_index(tuple(nb))])
                    data.append(-1.0 / h2)
            rows.append(p)
            cols.append(p)
            data.append(center)
        else:
            ax = int(np.flatnonzero(signs[fi])[0])
            sign = int(signs[fi, ax])
            h = grid.spacings[ax]
            inward = list(multi)
            inward[ax] -= sign
            rows.append(p)
            cols.append(p)
            data.append(1.0 / h)
            rows.append(p)
            cols.append(pos[grid.flat_index(tuple(inward))])
            data.append(-1.0 / h)
    n = unknowns.size
    return scipy.sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def unknown_vector(grid: Grid, u) -> np.ndarray:
    """Coerce a GridFunction / full nodal array / unknown vector to unknowns."""
    unknowns = _positions(grid)[0]
    if isinstance(u, GridFunction):
        return u.values[unknowns].astype(float)
    arr = np.asarray(u, dtype=float).reshape(-1)
    if arr.size == grid.num_nodes:
        return arr[unknowns].copy()
    if arr.size == unknowns.size:
        return arr.copy()
    raise ValueError(
        f"expected {unknowns.size} unknowns or {grid.num_nodes} nodal values, got {arr.size}"
    )


def complete_with_corners(grid: Grid, vec) -> np.ndarray:
    """Full nodal array from an unknown vector; corner values are averaged in.

    Each corner takes the mean of its grid neighbors that sit on fewer
    domain faces (for a 2D corner these are its two smooth-boundary
    neighbors).  Corners carry no equation, so this is a presentation
    convention, not part of the discrete system.
    """
    unknowns, _, _, _ = _positions(grid)
    vec = np.asarray(vec, dtype=float).reshape(-1)
    if vec.size != unknowns.size:
        raise ValueError(f"expected {unknowns.size} unknowns, got {vec.size}")
    full = np.empty(grid.num_nodes)
    full[:] = np.nan
    full[unknowns] = vec
    corners = grid.corner_indices()
    if corners.size:
        pinned = np.abs(grid.normal_signs()).sum(axis=1)
        for fi in sorted(corners, key=lambda i: pinned[i]):
            multi = grid.multi_index(fi)
            vals = []
            for ax in range(grid.ndim):
                for step in (-1, 1):
                    nb = list(multi)
                    nb[ax] += step
                    if not 0 <= nb[ax] < grid.counts[ax]:
                        continue
                    nfi = grid.flat_index(tuple(nb))
                    if pinned[nfi] < pinned[fi]:
                        vals.append(full[nfi])
            full[fi] = float(np.mean(vals))
    return full


def _single_flux(problem: SingleProblem, boundary_vals: np.ndarray) -> np.ndarray:
    if problem.cutoff is not None:
        return problem.lam * cutoff_eval(problem.f, problem.cutoff, boundary_vals)
    return problem.lam * eval_poly(problem.f, boundary_vals)


def _single_flux_deriv(problem: SingleProblem, boundary_vals: np.ndarray) -> np.ndarray:
    if problem.cutoff is not None:
        return problem.lam * cutoff_deriv(problem.f, problem.cutoff, boundary_vals)
    return problem.lam * eval_poly_deriv(problem.f, boundary_vals)


def residual_single(problem: SingleProblem, u) -> np.ndarray:
    """Residual over the unknown nodes; zero exactly at discrete solutions."""
    grid = problem.grid
    vec = unknown_vector(grid, u)
    A = assemble_linear_operator(grid)
    r = A.matvec(vec) if isinstance(A, TridiagonalMatrix) else A @ vec
    bpos = boundary_positions(grid)
    r[bpos] -= _single_flux(problem, vec[bpos])
    return r


def jacobian_single(problem: SingleProblem, u):
    """Exact Jacobian of :func:`residual_single` (clamped branches get slope 0)."""
    grid = problem.grid
    vec = unknown_vector(grid, u)
    A = assemble_linear_operator(grid)
    bpos = boundary_positions(grid)
    delta = -_single_flux_deriv(problem, vec[bpos])
    if isinstance(A, TridiagonalMatrix):
        return A.with_diag_update(bpos, delta)
    J = A.tolil(copy=True)
    for p, d in zip(bpos, np.atleast_1d(delta)):
        J[p, p] += d
    return J.tocsr()


def split_system_vector(grid: Grid, w) -> tuple[np.ndarray, np.ndarray]:
    """Split a stacked (u; v) vector; accepts full nodal or unknown-sized halves."""
    n = unknown_indices(grid).size
    arr = np.asarray(w, dtype=float).reshape(-1)
    if arr.size == 2 * n:
        return arr[:n].copy(), arr[n:].copy()
    if arr.size == 2 * grid.num_nodes:
        half = grid.num_nodes
        return unknown_vector(grid, arr[:half]), unknown_vector(grid, arr[half:])
    raise ValueError(f"expected a stacked vector of length {2 * n}, got {arr.size}")


def residual_system(problem: SystemProblem, w) -> np.ndarray:
    """Stacked residual: u-rows with flux lam*f(v), v-rows with flux lam*g(u)."""
    grid = problem.grid
    uvec, vvec = split_system_vector(grid, w)
    A = assemble_linear_operator(grid)
    mv = A.matvec if isinstance(A, TridiagonalMatrix) else A.__matmul__
    ru = mv(uvec)
    rv = mv(vvec)
    bpos = boundary_positions(grid)
    cf, cg = problem.cutoffs if problem.cutoffs is not None else (None, None)
    lam = problem.lam
    if cf is not None:
        ru[bpos] -= lam * cutoff_eval(problem.f, cf, vvec[bpos])
    else:
        ru[bpos] -= lam * eval_poly(problem.f, vvec[bpos])
    if cg is not None:
        rv[bpos] -= lam * cutoff_eval(problem.g, cg, uvec[bpos])
    else:
        rv[bpos] -= lam * eval_poly(problem.g, uvec[bpos])
    return np.concatenate([ru, rv])


def jacobian_system(problem: SystemProblem, w):
    """Block Jacobian: diagonal blocks A, cross blocks -lam f'(v) / -lam g'(u)
    on boundary rows only (the equations decouple in the interior)."""
    grid = problem.grid
    uvec, vvec = split_system_vector(grid, w)
    A = assemble_linear_operator(grid)
    A_csr = A.to_csr() if isinstance(A, TridiagonalMatrix) else A
    n = A_csr.shape[0]
    bpos = boundary_positions(grid)
    cf, cg = problem.cutoffs if problem.cutoffs is not None else (None, None)
    lam = problem.lam
    if cf is not None:
        df = lam * cutoff_deriv(problem.f, cf, vvec[bpos])
    else:
        df = lam * eval_poly_deriv(problem.f, vvec[bpos])
    if cg is not None:
        dg = lam * cutoff_deriv(problem.g, cg, uvec[bpos])
    else:
        dg = lam * eval_poly_deriv(problem.g, uvec[bpos])
    Cf = scipy.sparse.coo_matrix((-np.atleast_1d(df), (bpos, bpos)), shape=(n, n))
    Cg = scipy.sparse.coo_matrix((-np.atleast_1d(dg), (bpos, bpos)), shape=(n, n))
    return scipy.sparse.bmat([[A_csr, Cf], [Cg, A_csr]], format="csr")


def flux_rhs(grid: Grid, flux_values: np.ndarray) -> np.ndarray:
    """Right-hand side with ``flux_values`` on boundary rows, zero elsewhere."""
    n = unknown_indices(grid).size
    b = np.zeros(n)
    b[boundary_positions(grid)] = flux_values
    return b


def solve_linear(A, rhs) -> np.ndarray:
    """Direct solve dispatching on the matrix representation."""
    if isinstance(A, TridiagonalMatrix):
        return A.solve(rhs)
    return scipy.sparse.linalg.spsolve(A.tocsc(), rhs)
