"""Nearest a-harmonic function to a given interior field.

Minimizes ``1/2 |gamma_i - xi_i|^2`` subject to ``A_ii gamma_i + A_ib gamma_b = 0``.
Eliminating the constraint with ``G = A_ii^{-1} A_ib`` gives the normal
equations ``G^T G gamma_b = -G^T xi_i`` and ``gamma_i = -G gamma_b``.

On a P1 grid the normal matrix is singular: corner nodes do not couple to
the interior, and the two boundary neighbours of each corner reach the
interior through the same node. Boundary data in that null space leave the
interior (and hence the objective) unchanged, so they are fixed by choosing
the candidate of least energy on omega*. For corners this is the same
condensed value that ``fem.condense_corners`` assigns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import ProjectionError

_RANK_TOL = 1e-12
_INDEFINITE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class _Projector:
    G: np.ndarray
    R: np.ndarray  # orthonormal basis of the coupled boundary subspace
    chol: tuple  # Cholesky factor of R^T G^T G R
    N: np.ndarray  # orthonormal basis of the decoupled boundary subspace
    Phi: np.ndarray  # full-mesh functions carrying each decoupled direction
    energy_chol: tuple | None


def _build(system) -> _Projector:
    bmap = system.boundary_index_map
    G = system.harmonic_extension_operator()

    # Only the first interior ring sees the boundary; its coupling block is tiny.
    Aib = system.A_ib.tocsr()
    rows = np.flatnonzero(np.diff(Aib.indptr))
    if rows.size == 0:
        raise ProjectionError("boundary is not coupled to any interior node")
    _, s, Vt = la.svd(Aib[rows].toarray(), full_matrices=True)
    rank = int(np.sum(s > _RANK_TOL * s[0]))
    R = Vt[:rank].T
    N = Vt[rank:].T

    M = R.T @ (G.T @ (G @ R))
    M = 0.5 * (M + M.T)
    w = la.eigvalsh(M)
    if w[0] < -_INDEFINITE_TOL * w[-1]:
        raise ProjectionError(f"normal matrix is indefinite (min eigenvalue {w[0]:.3e})")
    try:
        chol = la.cho_factor(M, lower=False)
    except la.LinAlgError:
        raise ProjectionError("normal matrix is singular on the coupled boundary subspace") from None

    Phi = np.zeros((system.n_nodes, N.shape[1]))
    energy_chol = None
    if N.shape[1]:
        Phi[bmap] = N
        Phi[system.interior_index_map] = -G @ N
        E = Phi.T @ (system.A_full @ Phi)
        try:
            energy_chol = la.cho_factor(0.5 * (E + E.T), lower=False)
        except la.LinAlgError:
            raise ProjectionError("decoupled boundary directions carry no energy") from None
    return _Projector(G, R, chol, N, Phi, energy_chol)


def _projector(system) -> _Projector:
    cache = system._projectors
    if "projector" not in cache:
        with system._lock:
            if "projector" not in cache:
                cache["projector"] = _build(system)
    return cache["projector"]


def project_to_harmonic(system, xi) -> np.ndarray:
    """Project nodal field(s) ``xi`` onto the discrete a-harmonic space.

    Boundary entries of ``xi`` are ignored. A 2-D ``xi`` projects each column.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape[0] != system.n_nodes or xi.ndim > 2:
        raise ValueError(f"xi must have {system.n_nodes} rows, got shape {xi.shape}")
    P = _projector(system)
    xi_i = xi[system.interior_index_map]

    rhs = -(P.R.T @ (P.G.T @ xi_i))
    gb = P.R @ la.cho_solve(P.chol, rhs)

    out = np.zeros(xi.shape)
    bmap = system.boundary_index_map
    out[bmap] = gb
    out[system.interior_index_map] = -P.G @ gb
    if P.energy_chol is not None:
        t = la.cho_solve(P.energy_chol, -(P.Phi.T @ (system.A_full @ out)))
        out += P.Phi @ t
    return out
