import numpy as np
import pytest

from randbasis.coefficient import CoefficientField
from randbasis.fem import assemble
from randbasis.geometry import PatchPair, build_mesh
from randbasis.spectral import reference_basis


class Patch:
    """Mesh, stiffness system and (lazily) the reference basis of one patch."""

    def __init__(self, patch, field):
        self.patch = patch
        self.field = field
        self.mesh = build_mesh(patch)
        self.system = assemble(self.mesh, field)
        self._reference = None

    @property
    def reference(self):
        if self._reference is None:
            self._reference = reference_basis(self.system, self.mesh)
        return self._reference


@pytest.fixture(scope="session")
def paper():
    return Patch(PatchPair.paper(), CoefficientField.paper())


@pytest.fixture(scope="session")
def paper_constant():
    return Patch(PatchPair.paper(), CoefficientField.constant(1.0))


@pytest.fixture(scope="session")
def small():
    """17x17 nodes, paper medium restricted to the smaller box."""
    p = PatchPair(0.4, 0.8, 0.1)
    return Patch(p, CoefficientField.paper(0.8))


@pytest.fixture(scope="session")
def toy9():
    p = PatchPair(0.2, 0.4, 0.1)
    return Patch(p, CoefficientField.paper(0.4))


@pytest.fixture(scope="session")
def toy5_constant():
    p = PatchPair(0.1, 0.2, 0.1)
    return Patch(p, CoefficientField.constant(1.0, 0.2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
