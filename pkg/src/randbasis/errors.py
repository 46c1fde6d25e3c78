"""Exception types raised across the package."""


class RandBasisError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RandBasisError, ValueError):
    pass


class DomainError(RandBasisError, ValueError):
    pass


class EllipticityError(RandBasisError, ValueError):
    pass


class AssemblyError(RandBasisError):
    pass


class ProjectionError(RandBasisError):
    pass


class DegenerateSampleError(RandBasisError):
    def __init__(self, index, energy):
        super().__init__(f"sample {index} has degenerate energy {energy:.3e}")
        self.index = index
        self.energy = energy


class EmptySpaceError(RandBasisError):
    pass


class RankDeficiencyError(RandBasisError):
    def __init__(self, index):
        # index is 1-based, matching how frames are usually described
        super().__init__(f"function {index} is linearly dependent on its predecessors")
        self.index = index


class DistanceError(RandBasisError):
    pass


class CSVParseError(RandBasisError, ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
