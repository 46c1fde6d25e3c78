"""Randomized construction of optimal local bases for multiscale elliptic problems."""
from .coefficient import CoefficientField
from .errors import RandBasisError
from .fem import StiffnessSystem, assemble, dirichlet_solve, hat_harmonics
from .geometry import PatchPair, StructuredMesh, build_mesh
from .metrics import frame_from_basis, kolmogorov_distance, orthonormalize
from .projection import project_to_harmonic
from .sampling import STRATEGIES, SamplingSpec, generate_samples
from .spectral import SpectralBasis, randomized_basis, reference_basis

__all__ = [
    "CoefficientField",
    "PatchPair",
    "RandBasisError",
    "STRATEGIES",
    "SamplingSpec",
    "SpectralBasis",
    "StiffnessSystem",
    "StructuredMesh",
    "assemble",
    "build_mesh",
    "dirichlet_solve",
    "frame_from_basis",
    "generate_samples",
    "hat_harmonics",
    "kolmogorov_distance",
    "orthonormalize",
    "project_to_harmonic",
    "randomized_basis",
    "reference_basis",
]
__version__ = "0.1.0"
