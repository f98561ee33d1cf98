"""Tensor-product grids on N-rectangles and the discrete difference operators.

The domain is an N-rectangle (a_1,b_1) x ... x (a_N,b_N) partitioned into a
tensor grid with m_i >= 4 nodes per axis and uniform per-axis spacing
h_i = (b_i - a_i) / (m_i - 1).  Nodes are addressed by 0-based multi-indices
``alpha`` with coordinate ``a_i + alpha_i * h_i`` on axis ``i``, stored in a
flat array in C (lexicographic) order; ``Grid.flat_index`` /
``Grid.multi_index`` give the bijection.

Nodes are classified as interior, smooth-boundary (exactly one axis pinned to
a face) or corner (two or more axes pinned; only possible for N >= 2).  In 1D
both endpoints are smooth-boundary nodes.

Operators:

* ``diff_forward`` / ``diff_backward``:  (u(a+e_i) - u(a)) / h_i  and
  (u(a) - u(a-e_i)) / h_i, first order.
* ``diff_central``: their average, (u(a+e_i) - u(a-e_i)) / (2 h_i), second
  order.
* ``second_diff``: (u(a+e_i) - 2 u(a) + u(a-e_i)) / h_i^2, second order.
* ``discrete_laplacian``: sum of ``second_diff`` over all axes (interior
  nodes only).
* ``normal_derivative``: one-sided differences chosen by the sign of the
  outward normal so that no node outside the grid is ever referenced; first
  order.  Only defined at smooth-boundary nodes.

All operators are pure; ``Grid`` and ``GridFunction`` are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class NodeKind(enum.Enum):
    INTERIOR = "interior"
    SMOOTH_BOUNDARY = "smooth_boundary"
    CORNER = "corner"


@dataclass(frozen=True)
class NodeClass:
    """Classification of one grid node.

    ``outward_normal_signs`` has one entry per axis: -1 on the low face,
    +1 on the high face, 0 otherwise.  Smooth-boundary nodes have exactly
    one nonzero entry; corners have two or more.
    """

    tag: NodeKind
    outward_normal_signs: tuple[int, ...]


@dataclass(frozen=True)
class Domain:
    """Closed N-rectangle given as one (a_i, b_i) interval per axis."""

    bounds: tuple[tuple[float, float], ...]

    def __init__(self, bounds):
        normalized = tuple((float(a), float(b)) for a, b in bounds)
        if len(normalized) < 1:
            raise ValueError("domain needs at least one axis")
        for i, (a, b) in enumerate(normalized):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"axis {i}: bounds must be finite, got ({a}, {b})")
            if b <= a:
                raise ValueError(f"axis {i}: degenerate interval [{a}, {b}]")
        object.__setattr__(self, "bounds", normalized)

    @property
    def ndim(self) -> int:
        return len(self.bounds)


@dataclass(frozen=True)
class Grid:
    """Tensor grid over a :class:`Domain`; build with :func:`build_grid`."""

    domain: Domain
    counts: tuple[int, ...]
    spacings: tuple[float, ...]
    h_star_max: float
    h_star_min: float
    axes: tuple[np.ndarray, ...] = field(compare=False, repr=False)
    _kinds: np.ndarray = field(compare=False, repr=False)
    _normal_signs: np.ndarray = field(compare=False, repr=False)

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.counts))

    def flat_index(self, node) -> int:
        node = self._as_multi(node)
        return int(np.ravel_multi_index(node, self.counts))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(int(flat), self.counts))

    def coordinate(self, node) -> tuple[float, ...]:
        node = self._as_multi(node)
        return tuple(float(self.axes[i][node[i]]) for i in range(self.ndim))

    def classify(self, node) -> NodeClass:
        flat = self.flat_index(node)
        kind = NodeKind(_KIND_NAMES[self._kinds[flat]])
        return NodeClass(kind, tuple(int(s) for s in self._normal_signs[flat]))

    def node_kinds(self) -> np.ndarray:
        """Per-node kind codes (0 interior, 1 smooth boundary, 2 corner)."""
        return self._kinds

    def normal_signs(self) -> np.ndarray:
        """(num_nodes, ndim) array of outward normal signs."""
        return self._normal_signs

    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(self._kinds == 0)

    def smooth_boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(self._kinds == 1)

    def corner_indices(self) -> np.ndarray:
        return np.flatnonzero(self._kinds == 2)

    def meshgrid(self):
        return np.meshgrid(*self.axes, indexing="ij")

    def _as_multi(self, node) -> tuple[int, ...]:
        if np.isscalar(node):
            node = (int(node),)
        node = tuple(int(i) for i in node)
        if len(node) != self.ndim:
            raise ValueError(f"multi-index {node} has wrong length for a {self.ndim}-d grid")
        for i, a in enumerate(node):
            if not 0 <= a < self.counts[i]:
                raise ValueError(f"multi-index {node} outside grid of shape {self.counts}")
        return node


_KIND_NAMES = {0: "interior", 1: "smooth_boundary", 2: "corner"}


def build_grid(domain: Domain, counts) -> Grid:
    """Build the tensor grid with ``counts[i]`` nodes on axis ``i``.

    Every axis needs at least 4 nodes so that boundary stencils never reach
    across the domain.
    """
    if isinstance(domain, (list, tuple)) and domain and np.isscalar(domain[0]):
        domain = Domain((tuple(domain),))
    elif not isinstance(domain, Domain):
        domain = Domain(domain)
    if np.isscalar(counts):
        counts = (int(counts),)
    counts = tuple(int(m) for m in counts)
    if len(counts) != domain.ndim:
        raise ValueError(f"got {len(counts)} counts for a {domain.ndim}-d domain")
    for i, m in enumerate(counts):
        if m < 4:
            raise ValueError(f"axis {i}: at least 4 nodes per axis are required, got {m}")

    spacings = tuple((b - a) / (m - 1) for (a, b), m in zip(domain.bounds, counts))
    axes = tuple(
        np.linspace(a, b, m) for (a, b), m in zip(domain.bounds, counts)
    )

    # Node classification: count the axes pinned to a face.
    ndim = len(counts)
    shape = counts
    pinned = np.zeros(shape, dtype=np.int8)
    signs = np.zeros(shape + (ndim,), dtype=np.int8)
    for i in range(ndim):
        idx_lo = [slice(None)] * ndim
        idx_hi = [slice(None)] * ndim
        idx_lo[i] = 0
        idx_hi[i] = counts[i] - 1
        pinned[tuple(idx_lo)] += 1
        pinned[tuple(idx_hi)] += 1
        signs[tuple(idx_lo) + (i,)] = -1
        signs[tuple(idx_hi) + (i,)] = 1
    kinds = np.zeros(shape, dtype=np.uint8)
    kinds[pinned == 1] = 1
    kinds[pinned >= 2] = 2

    kinds_flat = kinds.reshape(-1)
    signs_flat = signs.reshape(-1, ndim)
    kinds_flat.setflags(write=False)
    signs_flat.setflags(write=False)
    for ax in axes:
        ax.setflags(write=False)

    return Grid(
        domain=domain,
        counts=counts,
        spacings=spacings,
        h_star_max=max(spacings),
        h_star_min=min(spacings),
        axes=axes,
        _kinds=kinds_flat,
        _normal_signs=signs_flat,
    )


@dataclass(frozen=True)
class GridFunction:
    """Real values attached to every node of a grid (corners included)."""

    grid: Grid
    values: np.ndarray

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=float).reshape(-1).copy()
        if values.size != grid.num_nodes:
            raise ValueError(
                f"expected {grid.num_nodes} values for grid {grid.counts}, got {values.size}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        mesh = grid.meshgrid()
        return cls(grid, fn(*mesh).reshape(-1))

    def value_at(self, node) -> float:
        return float(self.values[self.grid.flat_index(node)])

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def _neighbor(grid: Grid, node, axis: int, step: int) -> tuple[int, ...]:
    node = grid._as_multi(node)
    if not 0 <= axis < grid.ndim:
        raise ValueError(f"axis {axis} out of range for a {grid.ndim}-d grid")
    moved = list(node)
    moved[axis] += step
    if not 0 <= moved[axis] < grid.counts[axis]:
        raise ValueError(
            f"stencil at node {node} reaches outside the grid along axis {axis}"
        )
    return tuple(moved)


def diff_forward(u: GridFunction, axis: int, node) -> float:
    """(u(node + e_axis) - u(node)) / h_axis."""
    g = u.grid
    ahead = _neighbor(g, node, axis, +1)
    return (u.value_at(ahead) - u.value_at(node)) / g.spacings[axis]


def diff_backward(u: GridFunction, axis: int, node) -> float:
    """(u(node) - u(node - e_axis)) / h_axis."""
    g = u.grid
    behind = _neighbor(g, node, axis, -1)
    return (u.value_at(node) - u.value_at(behind)) / g.spacings[axis]


def diff_central(u: GridFunction, axis: int, node) -> float:
    """(u(node + e_axis) - u(node - e_axis)) / (2 h_axis)."""
    g = u.grid
    ahead = _neighbor(g, node, axis, +1)
    behind = _neighbor(g, node, axis, -1)
    return (u.value_at(ahead) - u.value_at(behind)) / (2.0 * g.spacings[axis])


def second_diff(u: GridFunction, axis: int, node) -> float:
    """(u(node + e_axis) - 2 u(node) + u(node - e_axis)) / h_axis^2."""
    g = u.grid
    ahead = _neighbor(g, node, axis, +1)
    behind = _neighbor(g, node, axis, -1)
    h = g.spacings[axis]
    return (u.value_at(ahead) - 2.0 * u.value_at(node) + u.value_at(behind)) / (h * h)


def discrete_laplacian(u: GridFunction, node) -> float:
    """Sum of ``second_diff`` over all axes; interior nodes only."""
    g = u.grid
    cls = g.classify(node)
    if cls.tag is not NodeKind.INTERIOR:
        raise ValueError(f"discrete laplacian needs an interior node, got {cls.tag.value}")
    return sum(second_diff(u, i, node) for i in range(g.ndim))


def normal_derivative(u: GridFunction, node) -> float:
    """Discrete outward normal derivative at a smooth-boundary node.

    On the axis with outward normal sign +1 the backward difference is used,
    with sign -1 the forward difference, so the stencil stays inside the
    grid.  Axes with sign 0 contribute central differences weighted by the
    zero normal component and therefore drop out of the sum.
    """
    g = u.grid
    cls = g.classify(node)
    if cls.tag is NodeKind.CORNER:
        raise ValueError("outward normal undefined at nonsmooth boundary point")
    if cls.tag is not NodeKind.SMOOTH_BOUNDARY:
        raise ValueError("normal derivative is only defined on boundary nodes")
    total = 0.0
    for i, sign in enumerate(cls.outward_normal_signs):
        if sign > 0:
            total += diff_backward(u, i, node)
        elif sign < 0:
            total -= diff_forward(u, i, node)
    return total
