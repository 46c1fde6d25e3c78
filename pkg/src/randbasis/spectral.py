"""Restricted generalized eigenproblem ``S c = lambda S* c`` and the bases built from it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import EmptySpaceError
from .fem import hat_harmonics

DEFLATION_TOL = 1e-10
REFERENCE_TOL = 1e-8


@dataclass(frozen=True)
class GramPair:
    S: np.ndarray  # energy Gram matrix on omega
    S_star: np.ndarray  # energy Gram matrix on omega*


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenpairs ``(lambda_i, psi_i)`` in nonincreasing order.

    ``psi`` holds one mean-zero function per column, E(omega*)-orthonormal,
    with ``<psi_i, psi_j>_E(omega) = lambda_i delta_ij``. The restricted
    modes are the same columns read on the nodes of omega.
    """

    lambdas: np.ndarray
    psi: np.ndarray
    n_selected: int
    provenance: str
    coefficients: np.ndarray | None = None

    def __len__(self):
        return len(self.lambdas)

    def top(self, n: int) -> np.ndarray:
        return self.psi[:, :n]

    def restricted(self, mesh, n: int | None = None) -> np.ndarray:
        modes = self.psi if n is None else self.psi[:, :n]
        return modes[mesh.in_omega]


def _sym(M):
    return 0.5 * (M + M.T)


def gram_pair(system, functions) -> GramPair:
    F = np.asarray(functions, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[1] == 0:
        raise ValueError("gram_pair needs at least one function")
    S = _sym(F.T @ (system.A_omega @ F))
    S_star = _sym(F.T @ (system.A_full @ F))
    return GramPair(S, S_star)


def gevp(pair: GramPair, deflation_tol: float = DEFLATION_TOL):
    """Deflated solve of ``S c = lambda S* c``.

    Directions of ``S*`` with eigenvalue at or below ``deflation_tol`` times
    the largest are discarded. Returns eigenvalues (nonincreasing, clipped to
    [0, 1]) and coefficient vectors as columns with ``c^T S* c = 1``.
    """
    S = _sym(np.asarray(pair.S, dtype=float))
    S_star = _sym(np.asarray(pair.S_star, dtype=float))
    d, U = la.eigh(S_star)
    if d.size == 0 or d[-1] <= 0:
        raise EmptySpaceError("S* has no positive eigenvalues")
    keep = d > deflation_tol * d[-1]
    if not keep.any():
        raise EmptySpaceError("every direction of S* falls below the deflation threshold")
    W = U[:, keep] / np.sqrt(d[keep])
    mu, V = la.eigh(_sym(W.T @ S @ W))
    order = np.argsort(mu, kind="stable")[::-1]
    lambdas = np.clip(mu[order], 0.0, 1.0 + 1e-10)
    lambdas = np.minimum(lambdas, 1.0)
    C = W @ V[:, order]
    return lambdas, C


def _basis_from(functions, pair, tol, provenance, deflation_tol):
    lambdas, C = gevp(pair, deflation_tol)
    psi = functions @ C
    psi -= psi.mean(axis=0)
    # count of leading eigenvalues at or above tol
    n_selected = int(np.sum(lambdas >= tol))
    return SpectralBasis(lambdas, psi, n_selected, provenance, C)


def reference_basis(system, mesh=None, tol: float = REFERENCE_TOL, include_corners: bool = False,
                    deflation_tol: float = DEFLATION_TOL) -> SpectralBasis:
    """Optimal local basis from the full set of boundary hat harmonics."""
    chi = hat_harmonics(system, mesh, include_corners)
    return _basis_from(chi, gram_pair(system, chi), tol, "reference", deflation_tol)


def randomized_basis(system, samples, tol: float = REFERENCE_TOL, provenance: str = "random",
                     deflation_tol: float = DEFLATION_TOL) -> SpectralBasis:
    """Basis from the GEVP restricted to the span of ``samples``."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    return _basis_from(samples, gram_pair(system, samples), tol, provenance, deflation_tol)
