"""Ghost-cell boundary extrapolation and centered difference operators.

The homogeneous Neumann condition is realized by even reflection across each
boundary face: the first ghost layer mirrors the first interior layer, the
second ghost layer (present when ``ghost_depth == 2``) mirrors the second
interior layer.  With that reflection both Laplacian stencils below are
symmetric and diagonalized by the DCT-II basis, which is what makes the
fast implicit solve possible (see :mod:`llgbdf.fastsolve`).

Corner and edge ghosts are produced by applying the face reflections
sequentially along x, then y, then z; that is sufficient for the
tensor-product stencils used here.
"""

from __future__ import annotations

import enum
from typing import Callable, Sequence

import numpy as np

from .mesh import MeshSpec, ScalarField, VectorField

__all__ = [
    "StencilOrder",
    "EXACT",
    "fill_ghosts",
    "laplacian",
    "gradient_norm_sq",
    "operator_order_probe",
]

#: Sentinel returned by :func:`operator_order_probe` when every error in the
#: refinement sequence is at round-off, so no slope can be fitted.
EXACT = "exact"


class StencilOrder(enum.IntEnum):
    SECOND = 2
    FOURTH = 4

    @property
    def ghost_required(self) -> int:
        return 1 if self is StencilOrder.SECOND else 2


def _axis_index(data: np.ndarray, axis: int) -> int:
    # spatial axes are the trailing three; a leading component axis may exist
    return data.ndim - 3 + axis


def _layer(data: np.ndarray, axis: int, idx: int) -> tuple[slice | int, ...]:
    sl: list[slice | int] = [slice(None)] * data.ndim
    sl[_axis_index(data, axis)] = idx
    return tuple(sl)


def fill_ghosts_array(data: np.ndarray, mesh: MeshSpec, active_only: bool = False) -> np.ndarray:
    """Even-reflection ghost fill on a raw ghosted array (in place).

    Degenerate axes get constant extension; no stencil ever reads those
    layers, so hot paths pass ``active_only=True`` to skip the copies.
    """
    g = mesh.ghost_depth
    for axis in range(3):
        n = mesh.dims[axis]
        if n == 1:
            if active_only:
                continue
            for layer in range(g):
                data[_layer(data, axis, layer)] = data[_layer(data, axis, g)]
                data[_layer(data, axis, g + 1 + layer)] = data[_layer(data, axis, g)]
            continue
        data[_layer(data, axis, g - 1)] = data[_layer(data, axis, g)]
        data[_layer(data, axis, g + n)] = data[_layer(data, axis, g + n - 1)]
        if g == 2:
            data[_layer(data, axis, 0)] = data[_layer(data, axis, g + 1)]
            data[_layer(data, axis, g + n + 1)] = data[_layer(data, axis, g + n - 2)]
    return data


def fill_ghosts(field: VectorField | ScalarField) -> VectorField | ScalarField:
    """Apply the even-reflection boundary rule to every face (in place)."""
    fill_ghosts_array(field.data, field.mesh)
    return field


def _shifted(data: np.ndarray, mesh: MeshSpec, axis: int, shift: int) -> np.ndarray:
    """Interior-shaped view of ``data`` displaced by ``shift`` cells on ``axis``."""
    g = mesh.ghost_depth
    sl: list[slice] = [slice(None)] * data.ndim
    for a in range(3):
        lo = g + (shift if a == axis else 0)
        sl[_axis_index(data, a)] = slice(lo, lo + mesh.dims[a])
    return data[tuple(sl)]


def laplacian_array(
    data: np.ndarray,
    mesh: MeshSpec,
    order: StencilOrder,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """Discrete Laplacian of a ghost-filled array, on interior cells.

    Second order: (u[i+1] - 2 u[i] + u[i-1]) / h^2 per active axis.
    Fourth order: (-u[i+2] + 16 u[i+1] - 30 u[i] + 16 u[i-1] - u[i-2]) / (12 h^2).
    """
    if order.ghost_required > mesh.ghost_depth:
        raise ValueError(f"{order.name} stencil needs ghost_depth >= {order.ghost_required}")
    center = _shifted(data, mesh, 0, 0)
    if out is None:
        out = np.zeros_like(center)
    else:
        out.fill(0.0)
    for axis in mesh.active_axes:
        h2 = mesh.spacing[axis] ** 2
        if order is StencilOrder.SECOND:
            out += (_shifted(data, mesh, axis, 1) - 2.0 * center + _shifted(data, mesh, axis, -1)) / h2
        else:
            out += (
                -_shifted(data, mesh, axis, 2)
                + 16.0 * _shifted(data, mesh, axis, 1)
                - 30.0 * center
                + 16.0 * _shifted(data, mesh, axis, -1)
                - _shifted(data, mesh, axis, -2)
            ) / (12.0 * h2)
    return out


def gradient_norm_sq_array(
    data: np.ndarray,
    mesh: MeshSpec,
    order: StencilOrder,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """Sum of squared centered slopes over active axes (and components).

    The slopes carry the 1/(2h) and 1/(12h) normalizations so the result
    approximates |grad u|^2 pointwise.
    """
    if order.ghost_required > mesh.ghost_depth:
        raise ValueError(f"{order.name} stencil needs ghost_depth >= {order.ghost_required}")
    if out is None:
        out = np.zeros(mesh.dims)
    else:
        out.fill(0.0)
    sum_comps = data.ndim == 4
    for axis in mesh.active_axes:
        h = mesh.spacing[axis]
        if order is StencilOrder.SECOND:
            slope = (_shifted(data, mesh, axis, 1) - _shifted(data, mesh, axis, -1)) / (2.0 * h)
        else:
            slope = (
                -_shifted(data, mesh, axis, 2)
                + 8.0 * _shifted(data, mesh, axis, 1)
                - 8.0 * _shifted(data, mesh, axis, -1)
                + _shifted(data, mesh, axis, -2)
            ) / (12.0 * h)
        np.square(slope, out=slope)
        out += slope.sum(axis=0) if sum_comps else slope
    return out


def laplacian(field: VectorField | ScalarField, order: StencilOrder) -> VectorField | ScalarField:
    """Discrete Laplacian as a new field; ghosts of the result are zero."""
    result = type(field).zeros(field.mesh)
    laplacian_array(field.data, field.mesh, order, out=result.interior)
    return result


def gradient_norm_sq(field: VectorField | ScalarField, order: StencilOrder) -> ScalarField:
    """|grad u|^2 as a scalar field; ghosts of the result are zero."""
    result = ScalarField.zeros(field.mesh)
    gradient_norm_sq_array(field.data, field.mesh, order, out=result.interior)
    return result


def operator_order_probe(
    op: Callable[[ScalarField], ScalarField],
    smooth_test_fn: tuple[Callable[..., np.ndarray], Callable[..., np.ndarray]],
    mesh_sequence: Sequence[MeshSpec],
    atol: float = 1e-11,
) -> float | str:
    """Measured convergence order of ``op`` on a mesh refinement sequence.

    ``smooth_test_fn`` is a pair ``(sample, exact)`` of vectorized functions
    of the coordinate grids; ``sample`` supplies the operand and ``exact``
    the analytic result of the operator.  Returns the least-squares slope of
    log(error) against log(h), or :data:`EXACT` when every error is at
    round-off (stencil exact on the test function).
    """
    if len(mesh_sequence) < 2:
        raise ValueError("need at least two meshes to fit an order")
    sample, exact = smooth_test_fn
    hs, errors = [], []
    for mesh in mesh_sequence:
        grids = mesh.center_grids()
        field = ScalarField.from_interior(mesh, sample(*grids))
        fill_ghosts(field)
        result = op(field)
        err = np.max(np.abs(result.interior - exact(*grids)))
        hs.append(max(mesh.spacing[a] for a in mesh.active_axes))
        errors.append(err)
    scale = max(errors)
    if scale <= atol:
        return EXACT
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)
