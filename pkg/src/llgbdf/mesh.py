"""Cell-centered rectangular grids and the field containers built on them.

Cell centers sit at ``origin + (i - 1/2) * h`` for ``i = 1..N`` on each axis.
Fields carry ``ghost_depth`` extra layers on every face so that boundary
extrapolation and wide stencils share one storage layout.  An axis with a
single cell is *degenerate*: stencils and transforms skip it, which is how
1D and 2D runs reuse the 3D code path unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "MeshSpec",
    "VectorField",
    "ScalarField",
    "make_mesh",
    "fill_value",
    "dump_field",
    "load_field",
]

FIELD_MAGIC = "llgfield v1"


@dataclass(frozen=True)
class MeshSpec:
    """Geometry of a cell-centered grid with ghost padding."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ghost_depth: int = 1

    def __post_init__(self) -> None:
        if len(self.dims) != 3 or any(int(n) != n or n < 1 for n in self.dims):
            raise ValueError(f"cell counts must be integers >= 1, got {self.dims}")
        if any(not np.isfinite(h) or h <= 0 for h in self.spacing):
            raise ValueError(f"spacings must be positive, got {self.spacing}")
        if self.ghost_depth not in (1, 2):
            raise ValueError(f"ghost_depth must be 1 or 2, got {self.ghost_depth}")

    @property
    def active_axes(self) -> tuple[int, ...]:
        return tuple(a for a in range(3) if self.dims[a] > 1)

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.spacing
        return hx * hy * hz

    @property
    def padded_shape(self) -> tuple[int, int, int]:
        g = self.ghost_depth
        return tuple(n + 2 * g for n in self.dims)  # type: ignore[return-value]

    @property
    def interior(self) -> tuple[slice, slice, slice]:
        """Slices selecting interior cells out of a ghosted array."""
        g = self.ghost_depth
        return tuple(slice(g, g + n) for n in self.dims)  # type: ignore[return-value]

    def centers(self, axis: int) -> np.ndarray:
        """Interior cell-center coordinates along one axis."""
        n = self.dims[axis]
        h = self.spacing[axis]
        return self.origin[axis] + (np.arange(1, n + 1) - 0.5) * h

    def center_grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable (Nx,Ny,Nz) coordinate grids of the interior centers."""
        x, y, z = (self.centers(a) for a in range(3))
        return np.meshgrid(x, y, z, indexing="ij")


class _Field:
    """Shared storage behavior of scalar and vector fields."""

    ncomp: int = 1

    def __init__(self, mesh: MeshSpec, data: np.ndarray):
        expected = self._shape(mesh)
        if data.shape != expected:
            raise ValueError(f"data shape {data.shape} does not match mesh, expected {expected}")
        self.mesh = mesh
        self.data = data

    @classmethod
    def _shape(cls, mesh: MeshSpec) -> tuple[int, ...]:
        shape = mesh.padded_shape
        return (cls.ncomp, *shape) if cls.ncomp > 1 else shape

    @classmethod
    def zeros(cls, mesh: MeshSpec):
        return cls(mesh, np.zeros(cls._shape(mesh)))

    @classmethod
    def from_interior(cls, mesh: MeshSpec, values: np.ndarray):
        """Wrap interior-shaped values into a ghosted field (ghosts zero)."""
        field = cls.zeros(mesh)
        field.interior[...] = values
        return field

    @property
    def interior(self) -> np.ndarray:
        sl = self.mesh.interior
        if self.ncomp > 1:
            return self.data[(slice(None), *sl)]
        return self.data[sl]

    def copy(self):
        return type(self)(self.mesh, self.data.copy())


class VectorField(_Field):
    """Three scalar components sampled at cell centers, with ghost layers.

    Holds the magnetization m, intermediates, and source terms.  Interior
    values of a projected magnetization satisfy ``|m| = 1`` pointwise.
    """

    ncomp = 3


class ScalarField(_Field):
    """One scalar sampled at cell centers, same ghost convention."""

    ncomp = 1


def make_mesh(
    dims: tuple[int, int, int],
    physical_extent: tuple[float, float, float],
    ghost_depth: int = 1,
) -> MeshSpec:
    """Build a mesh covering ``[0, extent]`` per axis with ``dims`` cells."""
    if any(int(n) != n or n < 1 for n in dims):
        raise ValueError(f"cell counts must be integers >= 1, got {dims}")
    if any(not np.isfinite(e) or e <= 0 for e in physical_extent):
        raise ValueError(f"extents must be positive, got {physical_extent}")
    spacing = tuple(e / n for e, n in zip(physical_extent, dims))
    return MeshSpec(dims=tuple(int(n) for n in dims), spacing=spacing, ghost_depth=ghost_depth)


def fill_value(mesh: MeshSpec, vector: tuple[float, float, float]) -> VectorField:
    """Uniform vector field; ghosts carry the same value (mirror of a constant)."""
    if not all(np.isfinite(v) for v in vector):
        raise ValueError(f"vector must be finite, got {vector}")
    field = VectorField.zeros(mesh)
    for c in range(3):
        field.data[c].fill(vector[c])
    return field


def dump_field(field: _Field, path: str | Path) -> None:
    """Write interior values: one-line text header, then little-endian f8.

    Flat order is x fastest, then y, then z, component blocks consecutive,
    so dumps are byte-for-byte reproducible.
    """
    interior = field.interior
    if field.ncomp == 1:
        interior = interior[np.newaxis]
    nx, ny, nz = field.mesh.dims
    with open(path, "wb") as fh:
        fh.write(f"{FIELD_MAGIC} {nx} {ny} {nz} {field.ncomp}\n".encode("ascii"))
        for c in range(field.ncomp):
            fh.write(np.ascontiguousarray(interior[c].T, dtype="<f8").tobytes())


def load_field(path: str | Path) -> np.ndarray:
    """Read a field dump; returns an (ncomp, Nx, Ny, Nz) array.

    Validates the header and the payload size.
    """
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if len(parts) != 6 or " ".join(parts[:2]) != FIELD_MAGIC:
            raise ValueError(f"not a {FIELD_MAGIC} file: header {header!r}")
        try:
            nx, ny, nz, ncomp = (int(p) for p in parts[2:])
        except ValueError as err:
            raise ValueError(f"malformed header {header!r}") from err
        if min(nx, ny, nz, ncomp) < 1:
            raise ValueError(f"malformed header {header!r}")
        payload = fh.read()
    expected = nx * ny * nz * ncomp * 8
    if len(payload) != expected:
        raise ValueError(f"payload is {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f8").reshape(ncomp, nz, ny, nx)
    return flat.transpose(0, 3, 2, 1).copy()
