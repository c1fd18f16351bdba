"""Energy functional, discrete error norms, order fitting, wall tracking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ModelParams
from .mesh import VectorField
from .stencils import StencilOrder, fill_ghosts, gradient_norm_sq_array

__all__ = ["EnergyBreakdown", "energy", "error_norms", "fit_order", "wall_position"]


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy contributions; ``scaled`` records whether the physical
    prefactor mu0 Ms^2 / 2 was applied (otherwise values are dimensionless)."""

    exchange: float
    anisotropy: float
    zeeman: float
    stray: float
    scaled: bool = False

    @property
    def total(self) -> float:
        return self.exchange + self.anisotropy + self.zeeman + self.stray


def energy(
    m: VectorField,
    params: ModelParams,
    h_s: np.ndarray | None = None,
    order: StencilOrder = StencilOrder.SECOND,
    prefactor: float | None = None,
) -> EnergyBreakdown:
    """Midpoint-rule quadrature of the free-energy density.

    The integrand is eps |grad m|^2 + q (m2^2 + m3^2) - 2 h_e . m - h_s . m;
    the gradient term uses the run's stencil order.  ``h_s`` must be
    consistent with ``m`` when the stray field is enabled.
    """
    mesh = m.mesh
    vol = mesh.cell_volume
    fill_ghosts(m)
    grad2 = gradient_norm_sq_array(m.data, mesh, order)
    interior = m.interior
    exchange = params.epsilon * vol * float(grad2.sum())
    anisotropy = params.aniso_q * vol * float((interior[1] ** 2 + interior[2] ** 2).sum())
    zeeman = 0.0
    if any(params.h_ext):
        he = np.asarray(params.h_ext)[:, None, None, None]
        zeeman = -2.0 * vol * float((he * interior).sum())
    stray = 0.0
    if h_s is not None:
        stray = -vol * float((h_s * interior).sum())
    scale = prefactor if prefactor is not None else 1.0
    return EnergyBreakdown(
        exchange=scale * exchange,
        anisotropy=scale * anisotropy,
        zeeman=scale * zeeman,
        stray=scale * stray,
        scaled=prefactor is not None,
    )


def error_norms(
    m: VectorField,
    exact_interior: np.ndarray,
    order: StencilOrder = StencilOrder.SECOND,
) -> tuple[float, float, float]:
    """(linf, l2, h1) of the vector error against cell-center samples.

    linf takes the pointwise Euclidean magnitude of the error vector; l2 is
    volume-weighted; h1 adds the discrete gradient seminorm (same stencil
    order as the run) to the l2 part.
    """
    mesh = m.mesh
    vol = mesh.cell_volume
    err = VectorField.zeros(mesh)
    err.interior[...] = m.interior - exact_interior
    fill_ghosts(err)
    e = err.interior
    mag2 = (e * e).sum(axis=0)
    linf = float(np.sqrt(mag2.max()))
    l2_sq = vol * float(mag2.sum())
    grad2 = gradient_norm_sq_array(err.data, mesh, order)
    h1 = float(np.sqrt(l2_sq + vol * float(grad2.sum())))
    return linf, float(np.sqrt(l2_sq)), h1


def fit_order(pairs: list[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(step or h)."""
    if len(pairs) < 2:
        raise ValueError("need at least two (step, error) pairs")
    steps = np.asarray([p[0] for p in pairs], dtype=float)
    errors = np.asarray([p[1] for p in pairs], dtype=float)
    if np.any(steps <= 0) or np.any(errors <= 0) or not np.all(np.isfinite(steps) & np.isfinite(errors)):
        raise ValueError("steps and errors must be positive and finite")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


def wall_position(m: VectorField) -> float | None:
    """Zero crossing of the yz-averaged first component along x.

    Linear interpolation between the bracketing cell centers; returns None
    when the averaged profile never changes sign ("no wall").
    """
    mesh = m.mesh
    profile = m.interior[0].mean(axis=(1, 2))
    x = mesh.centers(0)
    sign_change = np.nonzero(profile[:-1] * profile[1:] < 0.0)[0]
    exact_zero = np.nonzero(profile == 0.0)[0]
    if exact_zero.size and (not sign_change.size or exact_zero[0] <= sign_change[0]):
        return float(x[exact_zero[0]])
    if not sign_change.size:
        return None
    i = int(sign_change[0])
    frac = profile[i] / (profile[i] - profile[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i]))
