"""Subspace energy, Kolmogorov distance, and checkers for the energy-to-distance bounds.

Everything here works on an inner-product pair ``(A, B)`` and frames given
as column matrices. For PDE frames ``A`` is the omega stiffness matrix and
``B`` the omega* one; synthetic pencils use small dense matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.stats import ortho_group

from .errors import DistanceError, RankDeficiencyError

DEPENDENCE_TOL = 1e-12
SINGULAR_TOL = 1e-13
_REGIME_MARGIN = 1e-10  # keeps rounding at E = lambda_2 out of the bound's regime


def _sym(M):
    return 0.5 * (M + M.T)


def _as_columns(F):
    F = np.asarray(F, dtype=float)
    return F[:, None] if F.ndim == 1 else F


@dataclass(frozen=True, eq=False)
class SubspaceFrame:
    functions: np.ndarray  # columns, E(omega*)-orthonormal
    source: str = ""

    @property
    def dim(self) -> int:
        return self.functions.shape[1]


@dataclass(frozen=True, eq=False)
class PencilInstance:
    A: np.ndarray
    B: np.ndarray
    lambdas: np.ndarray  # strictly decreasing
    X: np.ndarray  # B-orthonormal eigenvectors as columns
    k: int
    seed: int


@dataclass
class BoundReport:
    checker: str
    lhs: float
    rhs: float
    holds: bool | None  # None when the bound's hypothesis fails
    instance_seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def applicable(self) -> bool:
        return self.holds is not None


# -- core linear algebra ---------------------------------------------------

def b_orthonormalize(B, F) -> np.ndarray:
    """Modified Gram-Schmidt in the ``B`` inner product, with one reorthogonalization pass."""
    F = _as_columns(F).copy()
    Q = np.empty_like(F)
    BQ = np.empty_like(F)
    for j in range(F.shape[1]):
        v = F[:, j]
        n0 = np.sqrt(max(v @ (B @ v), 0.0))
        for _ in range(2):
            for i in range(j):
                v = v - (BQ[:, i] @ v) * Q[:, i]
        Bv = B @ v
        nv = np.sqrt(max(v @ Bv, 0.0))
        if n0 == 0.0 or nv < DEPENDENCE_TOL * n0:
            raise RankDeficiencyError(j + 1)
        Q[:, j] = v / nv
        BQ[:, j] = Bv / nv
    return Q


def trace_energy(A, B, Z) -> float:
    Z = _as_columns(Z)
    return float(np.trace(Z.T @ (A @ Z)) / np.trace(Z.T @ (B @ Z)))


def _abs_max(A) -> float:
    return float(abs(A).max()) if A.shape[0] else 0.0


def distance_matrix(A, Y, X) -> np.ndarray:
    """``X_A - C_A^T Y_A^{-1} C_A`` for frames ``Y`` (approximating) and ``X`` (target).

    Formed as ``R^T A R`` with the explicit A-orthogonal residual
    ``R = X - Y Y_A^{-1} C_A``; subtracting the Gram blocks directly loses
    about half the digits once the distance is small.
    """
    Y, X = _as_columns(Y), _as_columns(X)
    AY = A @ Y
    Y_A = _sym(Y.T @ AY)
    e, Q = la.eigh(Y_A)
    scale = max(e[-1], _abs_max(A) * float(np.max(np.sum(Y * Y, axis=0))))
    if e[0] <= SINGULAR_TOL * scale:
        raise DistanceError(f"Y_A is numerically singular (eigenvalues {e[0]:.3e} .. {e[-1]:.3e})")

    def solve(rhs):
        return Q @ ((Q.T @ rhs) / e[:, None])

    R = X - Y @ solve(AY.T @ X)
    R -= Y @ solve(AY.T @ R)  # one refinement step
    return _sym(R.T @ (A @ R))


def kolmogorov_distance_matrix(A, Y, X) -> float:
    """``sup_{|alpha|<=1} min_beta |X alpha - Y beta|_A`` with ``X`` B-orthonormal."""
    M = distance_matrix(A, Y, X)
    return float(np.sqrt(max(la.eigvalsh(M)[-1], 0.0)))


def best_approximation_error(A, Gamma, u) -> float:
    """``min_{g in span Gamma} |u - g|_A``."""
    Gamma = _as_columns(Gamma)
    u = np.asarray(u, dtype=float)
    G_A = _sym(Gamma.T @ (A @ Gamma))
    b = Gamma.T @ (A @ u)
    e, Q = la.eigh(G_A)
    if e[-1] <= 0 or e[0] <= SINGULAR_TOL * e[-1]:
        raise DistanceError("approximation frame is numerically singular in the A inner product")
    proj = np.sum((Q.T @ b) ** 2 / e)
    return float(np.sqrt(max(u @ (A @ u) - proj, 0.0)))


# -- PDE-level wrappers ----------------------------------------------------

def orthonormalize(system, functions, source: str = "") -> SubspaceFrame:
    return SubspaceFrame(b_orthonormalize(system.A_full, functions), source)


def frame_from_basis(basis, n: int | None = None) -> SubspaceFrame:
    """Leading modes of a SpectralBasis; they are already E(omega*)-orthonormal."""
    psi = basis.psi if n is None else basis.psi[:, :n]
    return SubspaceFrame(psi, basis.provenance)


def energy_of_space(system, frame: SubspaceFrame) -> float:
    return trace_energy(system.A_omega, system.A_full, frame.functions)


def kolmogorov_distance(system, Y: SubspaceFrame, X: SubspaceFrame) -> float:
    """Distance from span Y to span X, measured in E(omega) over the E(omega*) unit ball of X."""
    return kolmogorov_distance_matrix(system.A_omega, Y.functions, X.functions)


# -- synthetic pencils -----------------------------------------------------

def synthetic_pencil(n: int, k: int, gap: float = 2.0, seed: int = 0) -> PencilInstance:
    """Random SPD pencil with ``lambda_k / lambda_{k+1} >= gap``."""
    if not n > k >= 1:
        raise ValueError("need n > k >= 1")
    if gap < 1:
        raise ValueError("gap factor must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), n, k]))
    head = np.sort(rng.uniform(0.3, 1.0, k))[::-1]
    tail = np.sort(rng.uniform(0.05, 0.95, n - k))[::-1] * head[-1] / gap
    lambdas = np.concatenate([head, tail])
    # break exact ties so the ordering is strict
    lambdas = lambdas * (1 + 1e-9 * np.arange(n, 0, -1))

    Qb = ortho_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    sb = rng.uniform(1.0, 3.0, n)
    B = _sym((Qb * sb) @ Qb.T)
    B_inv_half = (Qb / np.sqrt(sb)) @ Qb.T
    O = ortho_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    X = B_inv_half @ O
    BX = B @ X
    A = _sym((BX * lambdas) @ BX.T)
    return PencilInstance(A, B, lambdas, X, k, int(seed))


def random_frame(inst: PencilInstance, m: int, spread: float, rng) -> np.ndarray:
    """B-orthonormal ``m``-frame tilted away from the top-``m`` eigenvectors by about ``spread``."""
    n = len(inst.lambdas)
    C = np.zeros((n, m))
    C[:m, :m] = np.eye(m)
    C += spread * rng.standard_normal((n, m))
    Qc, _ = np.linalg.qr(C)
    return inst.X @ Qc


# -- bound checkers --------------------------------------------------------

def _top_energy(inst, k):
    return float(np.mean(inst.lambdas[:k]))


def check_prop_41(inst: PencilInstance, x) -> BoundReport:
    """One-mode angle bound in terms of the Rayleigh quotient of ``x``."""
    lam = inst.lambdas
    x = np.asarray(x, dtype=float)
    E = float(x @ inst.A @ x / (x @ inst.B @ x))
    lhs = kolmogorov_distance_matrix(inst.A, x, inst.X[:, 0])
    if not E > lam[1] * (1 + _REGIME_MARGIN):
        return BoundReport("prop_41", lhs, float("nan"), None, inst.seed, {"energy": E})
    l1, l2 = lam[0], lam[1]
    rhs = float(np.sqrt(max(l1 * l2 * (l1 - E) / ((l1 - l2) * E), 0.0)))
    return BoundReport("prop_41", lhs, rhs, lhs <= rhs + 1e-9, inst.seed, {"energy": E})


def _split(inst, Y, k):
    C = inst.X.T @ inst.B @ Y
    return C[:k], C[k:]


def check_lemma_42(inst: PencilInstance, Y, k: int | None = None) -> BoundReport:
    """Trace of the off-target block against the energy gap; invertibility of the on-target block."""
    k = inst.k if k is None else k
    Y = _as_columns(Y)
    lam = inst.lambdas
    gap = lam[k - 1] - lam[k]
    Ch, Cl = _split(inst, Y, k)
    trace = float(np.sum(Cl ** 2))
    dE = _top_energy(inst, k) - trace_energy(inst.A, inst.B, Y)
    if not gap > 0:
        return BoundReport("lemma_42", trace, float("nan"), None, inst.seed)
    bound = k * dE / gap
    holds = trace <= bound + 1e-9
    invertible = None
    if dE < gap / k:
        invertible = bool(la.svdvals(Ch)[-1] > 1e-12)
        holds = holds and invertible
    return BoundReport("lemma_42", trace, float(bound), holds, inst.seed,
                       {"trace_ClTCl": trace, "bound": float(bound), "Ch_invertible": invertible})


def check_thm_43(inst: PencilInstance, Y, k: int | None = None) -> BoundReport:
    """Kolmogorov distance from span Y to the top-k eigenspace against both energy estimates."""
    k = inst.k if k is None else k
    Y = _as_columns(Y)
    lam = inst.lambdas
    gap = lam[k - 1] - lam[k]
    dE = _top_energy(inst, k) - trace_energy(inst.A, inst.B, Y)
    distance = kolmogorov_distance_matrix(inst.A, Y, inst.X[:, :k])
    if not (gap > 0 and dE <= gap / (2 * k)):
        return BoundReport("thm_43", distance, float("nan"), None, inst.seed)
    _, Cl = _split(inst, Y, k)
    c = float(la.eigvalsh(Cl.T @ Cl)[-1]) if Cl.size else 0.0
    est = float(np.sqrt(lam[k] * c / (1 - c)))
    est2 = float(np.sqrt(max(2 * lam[k] * k * dE / gap, 0.0)))
    rhs = min(est, est2)
    return BoundReport("thm_43", distance, rhs, distance <= rhs + 1e-9, inst.seed,
                       {"distance": distance, "bound_est": est, "bound_est2": est2})


def thm_45_bound(A, lambda_next: float, Psi_n, Gamma, u) -> BoundReport:
    """Best-approximation error of ``u`` from Gamma against ``sqrt(lambda_{n+1}) + d(Gamma, Psi_n)``."""
    lhs = best_approximation_error(A, Gamma, u)
    d = kolmogorov_distance_matrix(A, Gamma, Psi_n)
    rhs = float(np.sqrt(max(lambda_next, 0.0)) + d)
    return BoundReport("thm_45", lhs, rhs, lhs <= rhs + 1e-8, None, {"distance": d})


def check_thm_45_pencil(inst: PencilInstance, Gamma, u, n: int) -> BoundReport:
    u = np.asarray(u, dtype=float)
    u = u / np.sqrt(u @ inst.B @ u)
    rep = thm_45_bound(inst.A, inst.lambdas[n], inst.X[:, :n], Gamma, u)
    rep.instance_seed = inst.seed
    return rep


def check_thm_45(system, reference, Gamma: SubspaceFrame, u, n: int) -> BoundReport:
    """PDE form: ``u`` a-harmonic with unit E(omega*) norm, Psi_n the top-n reference modes."""
    u = np.asarray(u, dtype=float)
    lam_next = reference.lambdas[n] if n < len(reference.lambdas) else 0.0
    return thm_45_bound(system.A_omega, lam_next, reference.psi[:, :n], Gamma.functions, u)


# -- Monte-Carlo suites ----------------------------------------------------

def run_bound_suite(trials: int = 100, seed: int = 0) -> list[BoundReport]:
    """``trials`` random synthetic-pencil checks for each of the four bounds."""
    reports = []
    for t in range(trials):
        s = int(np.random.SeedSequence([seed, t]).generate_state(1)[0])
        rng = np.random.default_rng(s)

        n = int(rng.integers(3, 13))
        inst = synthetic_pencil(n, 1, gap=float(rng.uniform(1.5, 10)), seed=s)
        x = inst.X[:, 0] + 10 ** rng.uniform(-3, 0) * (inst.X @ rng.standard_normal(n))
        reports.append(check_prop_41(inst, x))

        n = int(rng.integers(4, 13))
        k = int(rng.integers(1, n))
        inst = synthetic_pencil(n, k, gap=float(rng.uniform(1.5, 10)), seed=s)
        reports.append(check_lemma_42(inst, random_frame(inst, k, 10 ** rng.uniform(-3, 1), rng)))

        spread = 10 ** rng.uniform(-4, -1) / k
        reports.append(check_thm_43(inst, random_frame(inst, k, spread, rng)))

        nn = int(rng.integers(1, min(k, n - 1) + 1))
        g = int(rng.integers(nn, n))
        Gamma = random_frame(inst, g, 10 ** rng.uniform(-3, 0), rng)
        reports.append(check_thm_45_pencil(inst, Gamma, inst.X @ rng.standard_normal(n), nn))
    return reports
