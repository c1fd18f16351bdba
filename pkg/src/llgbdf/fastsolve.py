"""Constant-coefficient implicit solves diagonalized by the DCT-II.

Every BDF step reduces to three independent scalar systems

    (shift * I - diffusion * Lap_h) u = rhs,    shift = a/k > 0,  diffusion >= 0,

with ``Lap_h`` the centered Laplacian under even-reflection ghosts.  That
reflection makes each 1D stencil matrix symmetric with DCT-II eigenvectors,
so the solve is: forward DCT-II per active axis, divide each mode by the
symbol, inverse transform.  Orthonormal transform scaling keeps the round
trip an identity, so plans differ only in their mode divisors.

All per-axis symbols are nonpositive and vanish at the constant mode, hence
the assembled system is symmetric positive definite for any positive shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .mesh import MeshSpec, ScalarField, VectorField
from .stencils import StencilOrder, fill_ghosts

__all__ = ["HelmholtzPlan", "axis_symbols", "build_plan", "solve", "solve_vector"]


def axis_symbols(n: int, h: float, order: StencilOrder) -> np.ndarray:
    """DCT-II eigenvalues of the reflected 1D Laplacian stencil, j = 0..n-1."""
    theta = np.pi * np.arange(n) / n
    if order is StencilOrder.SECOND:
        return (2.0 * np.cos(theta) - 2.0) / h**2
    return (-2.0 * np.cos(2.0 * theta) + 32.0 * np.cos(theta) - 30.0) / (12.0 * h**2)


@dataclass(frozen=True)
class HelmholtzPlan:
    """Immutable solve plan; shareable across threads and solves."""

    mesh: MeshSpec
    order: StencilOrder
    shift: float
    diffusion: float
    denom: np.ndarray = field(repr=False)

    @property
    def transform_axes(self) -> tuple[int, ...]:
        return self.mesh.active_axes


def build_plan(
    mesh: MeshSpec,
    order: StencilOrder,
    shift: float,
    diffusion: float,
) -> HelmholtzPlan:
    """Precompute the per-mode divisors ``shift - diffusion * sum_axis(symbol)``."""
    if not np.isfinite(shift) or shift <= 0:
        raise ValueError(f"shift must be positive, got {shift}")
    if not np.isfinite(diffusion) or diffusion < 0:
        raise ValueError(f"diffusion must be nonnegative, got {diffusion}")
    if order.ghost_required > mesh.ghost_depth:
        raise ValueError(f"{order.name} stencil needs ghost_depth >= {order.ghost_required}")
    lam = [
        axis_symbols(mesh.dims[a], mesh.spacing[a], order) if mesh.dims[a] > 1 else np.zeros(1)
        for a in range(3)
    ]
    denom = shift - diffusion * (
        lam[0][:, None, None] + lam[1][None, :, None] + lam[2][None, None, :]
    )
    return HelmholtzPlan(mesh=mesh, order=order, shift=shift, diffusion=diffusion, denom=denom)


def solve_interior(plan: HelmholtzPlan, rhs: np.ndarray) -> np.ndarray:
    """Solve on a raw interior array (no ghosts); returns a new array.

    ``rhs`` may carry leading batch dimensions ahead of the three spatial
    axes; each batch slice is an independent scalar solve.
    """
    axes = tuple(rhs.ndim - 3 + a for a in plan.mesh.active_axes)
    if not axes:
        return rhs / plan.denom
    workers = -1 if rhs.size >= 16384 else None
    modes = sfft.dctn(rhs, type=2, norm="ortho", axes=axes, workers=workers)
    modes /= plan.denom
    return sfft.idctn(modes, type=2, norm="ortho", axes=axes, workers=workers)


def solve(plan: HelmholtzPlan, rhs: ScalarField) -> ScalarField:
    """Solve ``(shift I - diffusion Lap_h) u = rhs``; ghosts of u are filled."""
    if rhs.mesh.dims != plan.mesh.dims or rhs.mesh.spacing != plan.mesh.spacing:
        raise ValueError("rhs mesh does not match the plan mesh")
    out = ScalarField.from_interior(rhs.mesh, solve_interior(plan, rhs.interior))
    fill_ghosts(out)
    return out


def solve_vector(plan: HelmholtzPlan, rhs: VectorField) -> VectorField:
    """Componentwise scalar solves; components are independent."""
    if rhs.mesh.dims != plan.mesh.dims or rhs.mesh.spacing != plan.mesh.spacing:
        raise ValueError("rhs mesh does not match the plan mesh")
    out = VectorField.zeros(rhs.mesh)
    interior = rhs.interior
    for c in range(3):
        out.interior[c] = solve_interior(plan, interior[c])
    fill_ghosts(out)
    return out
