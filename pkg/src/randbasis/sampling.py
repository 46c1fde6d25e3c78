"""Random a-harmonic sample generation under seven strategies.

Strategies 1-4 draw a nodal field and project it onto the a-harmonic
space; strategies 5-7 draw Dirichlet data on the boundary of omega* and
extend it. Every sample is shifted to zero nodal mean, which picks a
representative modulo constants.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DegenerateSampleError
from .fem import condense_corners, dirichlet_solve
from .geometry import CORNER, boundary_dofs
from .projection import project_to_harmonic

STRATEGIES = (
    "interior_delta",
    "interior_iid",
    "full_domain_iid",
    "random_gaussian",
    "boundary_iid",
    "boundary_exp_covariance",
    "boundary_smoothed",
)
INTERIOR_STRATEGIES = STRATEGIES[:4]
BOUNDARY_STRATEGIES = STRATEGIES[4:]

MIN_SAMPLE_ENERGY = 1e-12
KL_VARIANCE_FRACTION = 0.95


@dataclass(frozen=True)
class SamplingSpec:
    strategy: str
    n_samples: int
    base_seed: int = 0
    gaussian_width: float = 1.0
    cov_sigma: float = 0.4
    smooth_sigma: float | None = None  # None -> 10 h
    kl_modes: int | None = None  # None -> modes holding 95% of the covariance trace

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if int(self.n_samples) < 1:
            raise ConfigurationError("n_samples must be at least 1")
        if not (0 <= int(self.base_seed) < 2**64):
            raise ConfigurationError("base_seed must fit in 64 unsigned bits")
        for name in ("gaussian_width", "cov_sigma", "smooth_sigma"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.kl_modes is not None and int(self.kl_modes) < 1:
            raise ConfigurationError("kl_modes must be at least 1")

    @property
    def ordinal(self) -> int:
        return STRATEGIES.index(self.strategy)

    @property
    def label(self) -> str:
        return f"{self.strategy}@{self.n_samples}"

    def with_seed(self, seed: int) -> "SamplingSpec":
        return replace(self, base_seed=int(seed))


def sample_rng(spec: SamplingSpec, k: int) -> np.random.Generator:
    """Independent stream for sample ``k``; depends only on (seed, strategy, k)."""
    ss = np.random.SeedSequence([int(spec.base_seed), spec.ordinal, int(k)])
    return np.random.default_rng(ss)


def _smoothing_kernel(sigma_steps: float) -> np.ndarray:
    half = int(np.floor(4 * sigma_steps))
    t = np.arange(-half, half + 1)
    w = np.exp(-0.5 * (t / sigma_steps) ** 2)
    return w / w.sum()


def circular_smooth(values, sigma_steps: float) -> np.ndarray:
    """Circular convolution with a unit-sum Gaussian truncated at 4 sigma."""
    values = np.asarray(values, dtype=float)
    w = _smoothing_kernel(sigma_steps)
    half = len(w) // 2
    out = np.zeros_like(values)
    for offset, weight in zip(range(-half, half + 1), w):
        out += weight * np.roll(values, offset)
    return out


_kl_lock = threading.Lock()


@lru_cache(maxsize=16)
def _kl_basis(patch, include_corners: bool, cov_sigma: float, kl_modes):
    from .geometry import build_mesh

    mesh = build_mesh(patch)
    pts = mesh.nodes[boundary_dofs(mesh, include_corners)]
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    mu, V = np.linalg.eigh(np.exp(-dist / cov_sigma))
    mu, V = mu[::-1].clip(min=0.0), V[:, ::-1]
    if kl_modes is None:
        frac = np.cumsum(mu) / mu.sum()
        kl_modes = int(np.searchsorted(frac, KL_VARIANCE_FRACTION) + 1)
    if kl_modes > len(mu):
        raise ConfigurationError(f"kl_modes={kl_modes} exceeds the {len(mu)} boundary DOFs")
    # fix eigenvector signs so the basis is reproducible across LAPACK builds
    V = V[:, :kl_modes] * np.sign(V[np.argmax(np.abs(V[:, :kl_modes]), axis=0), np.arange(kl_modes)])
    return np.sqrt(mu[:kl_modes]), V


def kl_basis(mesh, spec: SamplingSpec, include_corners: bool = False):
    """Scaled leading eigenpairs of the exponential boundary covariance."""
    with _kl_lock:
        return _kl_basis(mesh.patch, bool(include_corners), float(spec.cov_sigma), spec.kl_modes)


def draw_raw(spec: SamplingSpec, k: int, mesh, include_corners: bool = False) -> np.ndarray:
    """Raw random object for sample ``k``.

    Interior strategies return a nodal field (length ``n_nodes``); boundary
    strategies return Dirichlet data on all boundary nodes in walk order,
    zero at corners unless ``include_corners`` (``generate_samples`` then
    condenses those corner values).
    """
    if not 0 <= k < spec.n_samples:
        raise IndexError(f"sample index {k} out of range for n_samples={spec.n_samples}")
    rng = sample_rng(spec, k)
    s = spec.strategy
    n = mesh.n_nodes

    if s == "interior_delta":
        r = mesh.patch.ring_cells
        side = mesh.nodes_per_side
        inner = np.arange(r + 1, side - r - 1)
        i, j = rng.choice(inner), rng.choice(inner)
        xi = np.zeros(n)
        xi[j * side + i] = 1.0
        return xi
    if s == "interior_iid":
        xi = np.zeros(n)
        xi[mesh.in_omega] = rng.standard_normal(int(mesh.in_omega.sum()))
        return xi
    if s == "full_domain_iid":
        return rng.standard_normal(n)
    if s == "random_gaussian":
        candidates = np.flatnonzero(mesh.in_omega)
        x0 = mesh.nodes[rng.choice(candidates)]
        d2 = ((mesh.nodes - x0) ** 2).sum(axis=1)
        return np.exp(-d2 / (2 * spec.gaussian_width ** 2))

    walk = mesh.boundary_walk
    keep = np.ones(len(walk), dtype=bool) if include_corners else mesh.node_class[walk] != CORNER
    g = np.zeros(len(walk))
    if s == "boundary_iid":
        g[keep] = rng.standard_normal(int(keep.sum()))
    elif s == "boundary_exp_covariance":
        scale, V = kl_basis(mesh, spec, include_corners)
        g[keep] = V @ (scale * rng.standard_normal(len(scale)))
    else:
        sigma = 10 * mesh.patch.h if spec.smooth_sigma is None else spec.smooth_sigma
        # walk nodes are spaced h apart in arc length, corners included
        g = circular_smooth(rng.standard_normal(len(walk)), sigma / mesh.patch.h)
        g[~keep] = 0.0
    return g


def generate_samples(spec: SamplingSpec, system, mesh=None, include_corners: bool = False) -> np.ndarray:
    """``n_samples`` mean-zero a-harmonic functions as columns."""
    mesh = system.mesh if mesh is None else mesh
    raw = np.column_stack([draw_raw(spec, k, mesh, include_corners) for k in range(spec.n_samples)])
    if spec.strategy in INTERIOR_STRATEGIES:
        out = project_to_harmonic(system, raw)
    else:
        if not include_corners:
            raw = condense_corners(system, raw)
        out = dirichlet_solve(system, raw)
    out -= out.mean(axis=0)
    energy = np.einsum("ij,ij->j", out, system.A_full @ out)
    bad = np.flatnonzero(energy < MIN_SAMPLE_ENERGY)
    if bad.size:
        raise DegenerateSampleError(int(bad[0]), float(energy[bad[0]]))
    return out
