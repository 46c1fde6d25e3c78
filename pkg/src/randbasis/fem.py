"""P1 stiffness assembly and a-harmonic extension on the enlarged patch."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .coefficient import element_values
from .errors import AssemblyError
from .geometry import CORNER, boundary_dofs

RESIDUAL_TOL = 1e-10


def local_stiffness(points, a=1.0):
    """Element stiffness of the three P1 hat functions on one triangle."""
    p = np.asarray(points, dtype=float)
    return _local_stiffness(p[None], np.atleast_1d(a))[0]


def _local_stiffness(p, a):
    # p: (T, 3, 2). Gradient of barycentric i is the rotated opposite edge / (2 area).
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area2 = e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0])
    grads = np.stack([-e[..., 1], e[..., 0]], axis=-1) / area2[:, None, None]
    K = np.einsum("tik,tjk->tij", grads, grads)
    return K * (0.5 * area2 * a)[:, None, None]


def _assemble(mesh, a_elem, elements=None):
    tri = mesh.triangles if elements is None else mesh.triangles[elements]
    a = a_elem if elements is None else a_elem[elements]
    K = _local_stiffness(mesh.nodes[tri], a)
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = mesh.n_nodes
    A = sp.coo_matrix((K.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    return A


def _to_banded(A):
    """Upper banded storage of a symmetric sparse matrix for ``cholesky_banded``."""
    A = A.tocoo()
    u = int(np.max(A.col - A.row)) if A.nnz else 0
    n = A.shape[0]
    ab = np.zeros((u + 1, n))
    Acsr = A.tocsr()
    for d in range(u + 1):
        ab[u - d, d:] = Acsr.diagonal(d)
    return ab


@dataclass(eq=False)
class StiffnessSystem:
    mesh: object
    A_full: sp.csr_matrix
    A_omega: sp.csr_matrix
    A_ii: sp.csr_matrix
    A_ib: sp.csr_matrix
    interior_index_map: np.ndarray
    boundary_index_map: np.ndarray  # all boundary nodes in walk order
    factor_ii: np.ndarray  # banded upper Cholesky factor of A_ii
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)
    _G: np.ndarray | None = field(default=None, repr=False)
    _projectors: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.A_full.shape[0]

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_index_map)

    @property
    def diag_scale(self) -> float:
        return float(self.A_ii.diagonal().max())

    def solve_ii(self, rhs):
        return la.cho_solve_banded((self.factor_ii, False), rhs, check_finite=False)

    def harmonic_extension_operator(self) -> np.ndarray:
        """``G = A_ii^{-1} A_ib`` (interior x boundary), built once and cached."""
        if self._G is None:
            with self._lock:
                if self._G is None:
                    G = self.solve_ii(self.A_ib.toarray())
                    G.setflags(write=False)
                    self._G = G
        return self._G


def assemble(mesh, field) -> StiffnessSystem:
    a = element_values(field, mesh)
    A_full = _assemble(mesh, a)
    A_omega = _assemble(mesh, a, mesh.omega_elements)
    interior = mesh.interior
    boundary = boundary_dofs(mesh, include_corners=True)
    A_ii = A_full[interior][:, interior].tocsr()
    A_ib = A_full[interior][:, boundary].tocsr()
    try:
        factor = la.cholesky_banded(_to_banded(A_ii), lower=False, check_finite=False)
    except la.LinAlgError as exc:
        raise AssemblyError(f"interior stiffness is not positive definite: {exc}") from None
    return StiffnessSystem(
        mesh=mesh,
        A_full=A_full,
        A_omega=A_omega,
        A_ii=A_ii,
        A_ib=A_ib,
        interior_index_map=interior,
        boundary_index_map=boundary,
        factor_ii=factor,
    )


def energy_inner(system: StiffnessSystem, u, v, region: str = "omega_star"):
    """``u^T A_region v``; columns of 2-D inputs give a Gram block."""
    if region == "omega":
        A = system.A_omega
    elif region == "omega_star":
        A = system.A_full
    else:
        raise ValueError(f"region must be 'omega' or 'omega_star', got {region!r}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = u.T @ (A @ v)
    return float(out) if np.ndim(out) == 0 else out


def dirichlet_solve(system: StiffnessSystem, g) -> np.ndarray:
    """a-harmonic extension of boundary data ``g`` (one value per boundary node, walk order).

    A 2-D ``g`` of shape ``(n_boundary, k)`` extends ``k`` data sets at once.
    """
    g = np.asarray(g, dtype=float)
    if g.shape[0] != system.n_boundary or g.ndim > 2:
        raise ValueError(f"boundary data must have {system.n_boundary} rows, got shape {g.shape}")
    out = np.empty((system.n_nodes,) + g.shape[1:])
    out[system.boundary_index_map] = g
    out[system.interior_index_map] = -system.solve_ii(system.A_ib @ g)
    return out


def harmonic_residual(system: StiffnessSystem, u) -> float:
    """Max interior residual of ``A u = 0``, relative to the A_ii diagonal scale."""
    u = np.asarray(u, dtype=float)
    r = system.A_ii @ u[system.interior_index_map] + system.A_ib @ u[system.boundary_index_map]
    return float(np.max(np.abs(r))) / system.diag_scale


def is_harmonic(system: StiffnessSystem, u, tol: float = RESIDUAL_TOL) -> bool:
    return harmonic_residual(system, u) <= tol


def condense_corners(system: StiffnessSystem, g) -> np.ndarray:
    """Replace the corner entries of walk-order boundary data by their energy-minimal values.

    A corner touches only its two boundary neighbours, so its optimal value
    is the stiffness-weighted average of theirs. The result does not depend
    on the corner entries of ``g``.
    """
    g = np.array(g, dtype=float)
    if g.shape[0] != system.n_boundary or g.ndim > 2:
        raise ValueError(f"boundary data must have {system.n_boundary} rows, got shape {g.shape}")
    bmap = system.boundary_index_map
    pos = {int(node): k for k, node in enumerate(bmap)}
    A = system.A_full
    for k in np.flatnonzero(system.mesh.node_class[bmap] == CORNER):
        c = int(bmap[k])
        start, stop = A.indptr[c], A.indptr[c + 1]
        cols, vals = A.indices[start:stop], A.data[start:stop]
        diag = vals[cols == c][0]
        g[k] = sum(-v / diag * g[pos[int(j)]] for j, v in zip(cols, vals) if j != c)
    return g


def hat_harmonics(system: StiffnessSystem, mesh=None, include_corners: bool = False) -> np.ndarray:
    """a-harmonic extensions of every boundary hat, as columns in ``boundary_dofs`` order.

    Without corners, each hat's corner values are condensed rather than
    pinned, so the span equals the a-harmonic space with free corners.
    """
    mesh = system.mesh if mesh is None else mesh
    dofs = boundary_dofs(mesh, include_corners)
    pos = {int(node): k for k, node in enumerate(system.boundary_index_map)}
    g = np.zeros((system.n_boundary, len(dofs)))
    g[[pos[int(d)] for d in dofs], np.arange(len(dofs))] = 1.0
    if not include_corners:
        g = condense_corners(system, g)
    return dirichlet_solve(system, g)
