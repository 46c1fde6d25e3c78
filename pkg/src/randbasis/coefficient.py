"""Scalar media a(x, y) on the enlarged patch."""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, EllipticityError

_DOMAIN_SLACK = 1e-12


def paper_medium(x, y):
    """The five-term oscillatory medium used in the patch experiment."""
    s7x, s7y = np.sin(7 * np.pi * x), np.sin(7 * np.pi * y)
    s9y, c9x = np.sin(9 * np.pi * y), np.cos(9 * np.pi * x)
    c13x, c13y = np.cos(13 * np.pi * x), np.cos(13 * np.pi * y)
    return 0.2 * (
        (1.1 + s7x) / (1.1 + s7y)
        + (1.1 + s9y) / (1.1 + c9x)
        + (1.1 + c13y) / (1.1 + c13x)
        + (1.1 + c9x) / (1.1 + s9y)
        + (1.1 + s7y) / (1.1 + s7x)
    )


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """A positive medium on ``[-half_width, half_width]^2``.

    ``kind`` is ``"paper"``, ``"constant"`` (uses ``value``) or
    ``"tabulated"`` (uses ``table``, shape ``(ny, nx)``, row 0 at the bottom).
    """

    kind: str
    half_width: float
    value: float = 1.0
    table: np.ndarray | None = None
    alpha_star: float = 0.0
    beta_star: float = np.inf

    def __post_init__(self):
        if self.kind not in ("paper", "constant", "tabulated"):
            raise ConfigurationError(f"unknown medium kind {self.kind!r}")
        if self.kind == "tabulated" and (self.table is None or np.ndim(self.table) != 2):
            raise ConfigurationError("tabulated medium needs a 2-D table of cell values")

    @classmethod
    def paper(cls, half_width: float = 1.4) -> "CoefficientField":
        return cls("paper", half_width)

    @classmethod
    def constant(cls, c: float, half_width: float = 1.4) -> "CoefficientField":
        if not c > 0:
            raise EllipticityError(f"constant medium must be positive, got {c}")
        return cls("constant", half_width, value=float(c), alpha_star=float(c), beta_star=float(c))

    @classmethod
    def tabulated(cls, table, half_width: float = 1.4) -> "CoefficientField":
        table = np.asarray(table, dtype=float)
        if table.ndim != 2 or table.size == 0:
            raise ConfigurationError("tabulated medium needs a non-empty 2-D table")
        if np.any(table <= 0):
            raise EllipticityError("tabulated medium has nonpositive cell values")
        return cls("tabulated", half_width, table=table,
                   alpha_star=float(table.min()), beta_star=float(table.max()))

    def values(self, x, y) -> np.ndarray:
        """Vectorized evaluation; raises on points outside the domain."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = self.half_width
        if np.any(np.abs(x) > w + _DOMAIN_SLACK) or np.any(np.abs(y) > w + _DOMAIN_SLACK):
            raise DomainError(f"evaluation point outside [-{w}, {w}]^2")
        if self.kind == "paper":
            a = paper_medium(x, y)
        elif self.kind == "constant":
            a = np.full(np.broadcast(x, y).shape, self.value)
        else:
            ny, nx = self.table.shape
            ix = np.clip(np.floor((x + w) / (2 * w) * nx).astype(int), 0, nx - 1)
            iy = np.clip(np.floor((y + w) / (2 * w) * ny).astype(int), 0, ny - 1)
            a = self.table[iy, ix]
        if np.any(~(a > 0)):
            raise EllipticityError("medium is not positive at some evaluation point")
        return a

    def eval(self, point) -> float:
        x, y = point
        return float(self.values(x, y))

    def with_bounds(self, mesh) -> "CoefficientField":
        """Copy with alpha_star/beta_star taken over all element centroids of ``mesh``."""
        a = element_values(self, mesh)
        return replace(self, alpha_star=float(a.min()), beta_star=float(a.max()))


def element_values(field: CoefficientField, mesh) -> np.ndarray:
    """One-point (centroid) quadrature value of the medium on every triangle."""
    c = mesh.nodes[mesh.triangles].mean(axis=1)
    return field.values(c[:, 0], c[:, 1])


def element_value(field: CoefficientField, mesh, triangle_index: int) -> float:
    c = mesh.nodes[mesh.triangles[triangle_index]].mean(axis=0)
    return field.eval(c)


def read_tabulated(path, half_width: float = 1.4) -> CoefficientField:
    """Read ``nx ny`` followed by ``nx*ny`` whitespace-separated cell values, row-major."""
    path = Path(path)
    tokens = path.read_text().split()
    if len(tokens) < 2:
        raise ConfigurationError(f"{path}: missing 'nx ny' header")
    try:
        nx, ny = int(tokens[0]), int(tokens[1])
        vals = np.array([float(t) for t in tokens[2:]])
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    if nx <= 0 or ny <= 0 or vals.size != nx * ny:
        raise ConfigurationError(f"{path}: expected {nx}*{ny} values, found {vals.size}")
    return CoefficientField.tabulated(vals.reshape(ny, nx), half_width)


def write_tabulated(path, table) -> None:
    table = np.asarray(table, dtype=float)
    ny, nx = table.shape
    rows = [" ".join(repr(float(v)) for v in row) for row in table]
    Path(path).write_text(f"{nx} {ny}\n" + "\n".join(rows) + "\n")
