"""Semi-implicit BDF projection schemes for magnetization dynamics.

A finite-difference solver for the damped-precession evolution of a
unit-length vector field on cell-centered rectangular grids: BDF1/BDF2/BDF3
time stepping with explicit extrapolation of all nonlinear terms, pointwise
renormalization after every step, DCT-diagonalized constant-coefficient
implicit solves, and an FFT-convolution stray field.
"""

from .diagnostics import EnergyBreakdown, energy, error_norms, fit_order, wall_position
from .fastsolve import HelmholtzPlan, build_plan, solve, solve_vector
from .fields import (
    GAMMA,
    MU0,
    DemagKernel,
    ManufacturedSolution,
    ModelParams,
    build_demag_kernel,
    demag_tensor,
    manufactured_forcing,
    nondimensionalize,
    source_term,
    stray_field,
)
from .mesh import (
    MeshSpec,
    ScalarField,
    VectorField,
    dump_field,
    fill_value,
    load_field,
    make_mesh,
)
from .steppers import (
    BlowUpError,
    Scheme,
    SchemeState,
    bootstrap,
    extrapolate,
    init_state,
    project,
    run,
    step,
)
from .stencils import (
    EXACT,
    StencilOrder,
    fill_ghosts,
    gradient_norm_sq,
    laplacian,
    operator_order_probe,
)

__version__ = "0.1.0"
