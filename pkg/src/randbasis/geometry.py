"""Nested square patches and their uniform triangulation.

The enlarged patch ``[-w*, w*]^2`` is covered by a uniform grid of spacing
``h``; every cell is split along its lower-left to upper-right diagonal.
Nodes are numbered row-major: node ``j * n + i`` sits at
``(-w* + i h, -w* + j h)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

INTERIOR, BOUNDARY, CORNER = 0, 1, 2

_RATIO_TOL = 1e-9


def _integer_ratio(num: float, den: float, what: str) -> int:
    q = num / den
    k = int(round(q))
    if k <= 0 or abs(q - k) > _RATIO_TOL * max(1.0, abs(q)):
        raise ConfigurationError(f"{what} must be a positive integer, got {q!r}")
    return k


@dataclass(frozen=True)
class PatchPair:
    """The patch ``omega = [-w, w]^2`` inside ``omega* = [-w*, w*]^2``."""

    omega_half_width: float
    omega_star_half_width: float
    h: float

    def __post_init__(self):
        if not self.omega_half_width > 0:
            raise ConfigurationError("omega_half_width must be positive")
        if not self.omega_star_half_width > self.omega_half_width:
            raise ConfigurationError("omega_star_half_width must exceed omega_half_width")
        if not self.h > 0:
            raise ConfigurationError("h must be positive")
        # both raise ConfigurationError naming the broken invariant
        self.cells_per_side
        self.ring_cells

    @property
    def cells_per_side(self) -> int:
        return _integer_ratio(2 * self.omega_star_half_width, self.h,
                              "2*omega_star_half_width/h (mesh must cover omega* exactly)")

    @property
    def ring_cells(self) -> int:
        return _integer_ratio(self.omega_star_half_width - self.omega_half_width, self.h,
                              "(omega_star_half_width - omega_half_width)/h (boundary of omega must lie on mesh lines)")

    @property
    def nodes_per_side(self) -> int:
        return self.cells_per_side + 1

    @classmethod
    def paper(cls) -> "PatchPair":
        return cls(1.0, 1.4, 1.0 / 40)


@dataclass(frozen=True, eq=False)
class StructuredMesh:
    patch: PatchPair
    nodes: np.ndarray  # (N, 2)
    triangles: np.ndarray  # (T, 3)
    node_class: np.ndarray  # (N,) INTERIOR / BOUNDARY / CORNER
    in_omega: np.ndarray  # (N,) bool, closed omega
    omega_elements: np.ndarray  # indices into triangles
    boundary_walk: np.ndarray = field(repr=False)  # all boundary nodes, ccw from lower-left

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def nodes_per_side(self) -> int:
        return self.patch.nodes_per_side

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(self.node_class == INTERIOR)

    @property
    def boundary(self) -> np.ndarray:
        """All boundary nodes (corners included) in walk order."""
        return self.boundary_walk

    @property
    def corners(self) -> np.ndarray:
        return np.flatnonzero(self.node_class == CORNER)

    def grid(self, values) -> np.ndarray:
        """Reshape nodal values to a ``(ny, nx)`` array, row 0 at the bottom."""
        n = self.nodes_per_side
        return np.asarray(values).reshape(n, n)

    def omega_grid(self, values) -> np.ndarray:
        r = self.patch.ring_cells
        g = self.grid(values)
        return g[r:g.shape[0] - r, r:g.shape[1] - r]


def _walk(n: int) -> np.ndarray:
    idx = lambda i, j: j * n + i  # noqa: E731
    bottom = [idx(i, 0) for i in range(0, n - 1)]
    right = [idx(n - 1, j) for j in range(0, n - 1)]
    top = [idx(i, n - 1) for i in range(n - 1, 0, -1)]
    left = [idx(0, j) for j in range(n - 1, 0, -1)]
    return np.array(bottom + right + top + left, dtype=np.int64)


def build_mesh(patch: PatchPair) -> StructuredMesh:
    n = patch.nodes_per_side
    ws, h = patch.omega_star_half_width, patch.h
    coords = -ws + h * np.arange(n)
    X, Y = np.meshgrid(coords, coords)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    ii, jj = np.meshgrid(np.arange(n), np.arange(n))
    ii, jj = ii.ravel(), jj.ravel()
    on_x = (ii == 0) | (ii == n - 1)
    on_y = (jj == 0) | (jj == n - 1)
    node_class = np.full(n * n, INTERIOR, dtype=np.int8)
    node_class[on_x | on_y] = BOUNDARY
    node_class[on_x & on_y] = CORNER

    r = patch.ring_cells
    in_omega = (ii >= r) & (ii <= n - 1 - r) & (jj >= r) & (jj <= n - 1 - r)

    ci, cj = np.meshgrid(np.arange(n - 1), np.arange(n - 1))
    ci, cj = ci.ravel(), cj.ravel()
    ll = cj * n + ci
    lr, ul, ur = ll + 1, ll + n, ll + n + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    # interleave so triangles 2c and 2c+1 share cell c
    triangles = np.empty((2 * len(ll), 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    cell_in = (ci >= r) & (ci < n - 1 - r) & (cj >= r) & (cj < n - 1 - r)
    omega_elements = np.flatnonzero(np.repeat(cell_in, 2))

    return StructuredMesh(
        patch=patch,
        nodes=nodes,
        triangles=triangles,
        node_class=node_class,
        in_omega=in_omega,
        omega_elements=omega_elements,
        boundary_walk=_walk(n),
    )


def boundary_dofs(mesh: StructuredMesh, include_corners: bool = False) -> np.ndarray:
    """Boundary nodes of omega* walked counterclockwise from the lower-left corner."""
    walk = mesh.boundary_walk
    if include_corners:
        return walk.copy()
    return walk[mesh.node_class[walk] != CORNER]


def signed_areas(mesh: StructuredMesh) -> np.ndarray:
    p = mesh.nodes[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
