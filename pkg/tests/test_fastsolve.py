import time

import numpy as np
import pytest

from llgbdf.fastsolve import axis_symbols, build_plan, solve, solve_vector
from llgbdf.mesh import ScalarField, VectorField, make_mesh
from llgbdf.stencils import StencilOrder, fill_ghosts, laplacian


def _dense_operator(mesh, order, shift, diffusion):
    """Columnwise assembly through the stencil path (independent route)."""
    n = mesh.n_cells
    a = np.zeros((n, n))
    for col in range(n):
        field = ScalarField.zeros(mesh)
        field.interior.flat[col] = 1.0
        fill_ghosts(field)
        lap_col = laplacian(field, order).interior.ravel()
        a[:, col] = -diffusion * lap_col
        a[col, col] += shift
    return a


def test_second_order_symbols_two_cells():
    lam = axis_symbols(2, 0.5, StencilOrder.SECOND)
    assert lam[0] == pytest.approx(0.0, abs=1e-14)
    assert lam[1] == pytest.approx(-8.0)


@pytest.mark.parametrize("order", list(StencilOrder))
def test_constant_mode_symbol_is_zero(order):
    for n in (1, 2, 5, 9):
        assert axis_symbols(n, 0.1, order)[0] == pytest.approx(0.0, abs=1e-10)


def test_zero_diffusion_divides_by_shift():
    mesh = make_mesh((6, 3, 2), (1, 1, 1))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=4.0, diffusion=0.0)
    rng = np.random.default_rng(0)
    rhs = ScalarField.from_interior(mesh, rng.standard_normal(mesh.dims))
    u = solve(plan, rhs)
    assert np.allclose(u.interior, rhs.interior / 4.0, atol=1e-14)


def test_constant_rhs_gives_constant_over_shift():
    mesh = make_mesh((8, 4, 2), (1, 0.5, 0.25))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=2.5, diffusion=3.0)
    rhs = ScalarField.zeros(mesh)
    rhs.interior[...] = 7.0
    u = solve(plan, rhs)
    assert np.allclose(u.interior, 7.0 / 2.5, atol=1e-12)


@pytest.mark.parametrize("order", list(StencilOrder))
def test_matches_dense_solve_4x4x4(order):
    mesh = make_mesh((4, 4, 4), (0.25, 0.25, 0.25), ghost_depth=2)
    shift, diffusion = 120.0, 10.0
    plan = build_plan(mesh, order, shift, diffusion)
    rng = np.random.default_rng(5)
    rhs_values = rng.standard_normal(mesh.dims)
    dense = _dense_operator(mesh, order, shift, diffusion)
    expected = np.linalg.solve(dense, rhs_values.ravel()).reshape(mesh.dims)
    u = solve(plan, ScalarField.from_interior(mesh, rhs_values))
    rel = np.max(np.abs(u.interior - expected)) / np.max(np.abs(expected))
    assert rel <= 1e-10


@pytest.mark.parametrize(
    "dims,spacing",
    [((16, 1, 1), (1 / 16, 1, 1)), ((5, 3, 2), (0.2, 0.33, 0.5)), ((2, 2, 2), (0.5, 0.5, 0.5))],
)
@pytest.mark.parametrize("order", list(StencilOrder))
def test_residual_bound(dims, spacing, order):
    mesh = make_mesh(dims, tuple(s * n for s, n in zip(spacing, dims)), ghost_depth=2)
    shift, diffusion = 150.0, 10.0
    plan = build_plan(mesh, order, shift, diffusion)
    rng = np.random.default_rng(2)
    rhs_values = rng.standard_normal(mesh.dims)
    u = solve(plan, ScalarField.from_interior(mesh, rhs_values))
    applied = shift * u.interior - diffusion * laplacian(u, order).interior
    assert np.max(np.abs(applied - rhs_values)) <= 1e-10 * np.max(np.abs(rhs_values))


def test_self_adjoint():
    mesh = make_mesh((8, 6, 1), (0.125, 1 / 6, 1))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=30.0, diffusion=2.0)
    rng = np.random.default_rng(9)
    a = rng.standard_normal(mesh.dims)
    b = rng.standard_normal(mesh.dims)
    ua = solve(plan, ScalarField.from_interior(mesh, a)).interior
    ub = solve(plan, ScalarField.from_interior(mesh, b)).interior
    assert float((ua * b).sum()) == pytest.approx(float((a * ub).sum()), rel=1e-11)


def test_solve_vector_zero_components_stay_zero():
    mesh = make_mesh((6, 4, 1), (1, 1, 1))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=10.0, diffusion=1.0)
    rng = np.random.default_rng(1)
    rhs = VectorField.zeros(mesh)
    rhs.interior[0] = rng.standard_normal(mesh.dims)
    u = solve_vector(plan, rhs)
    scalar = solve(plan, ScalarField.from_interior(mesh, rhs.interior[0]))
    assert np.array_equal(u.interior[0], scalar.interior)
    assert not u.interior[1:].any()


def test_solve_vector_uniform():
    mesh = make_mesh((5, 5, 2), (1, 1, 1))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=5.0, diffusion=2.0)
    rhs = VectorField.zeros(mesh)
    rhs.interior[0] = 1.0
    rhs.interior[1] = -2.0
    rhs.interior[2] = 0.5
    u = solve_vector(plan, rhs)
    assert np.allclose(u.interior[0], 0.2, atol=1e-13)
    assert np.allclose(u.interior[1], -0.4, atol=1e-13)
    assert np.allclose(u.interior[2], 0.1, atol=1e-13)


def test_solve_vector_bitwise_componentwise():
    mesh = make_mesh((7, 3, 2), (1, 1, 1))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=8.0, diffusion=0.7)
    rng = np.random.default_rng(12)
    rhs = VectorField.from_interior(mesh, rng.standard_normal((3, 7, 3, 2)))
    u = solve_vector(plan, rhs)
    for c in range(3):
        scalar = solve(plan, ScalarField.from_interior(mesh, rhs.interior[c]))
        assert np.array_equal(u.interior[c], scalar.interior)


def test_degenerate_mesh_single_cell():
    mesh = make_mesh((1, 1, 1), (1, 1, 1))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=3.0, diffusion=5.0)
    rhs = ScalarField.from_interior(mesh, np.array([[[6.0]]]))
    assert solve(plan, rhs).interior[0, 0, 0] == pytest.approx(2.0)


def test_build_plan_validation():
    mesh = make_mesh((4, 1, 1), (1, 1, 1))
    with pytest.raises(ValueError):
        build_plan(mesh, StencilOrder.SECOND, shift=0.0, diffusion=1.0)
    with pytest.raises(ValueError):
        build_plan(mesh, StencilOrder.SECOND, shift=1.0, diffusion=-1.0)
    with pytest.raises(ValueError):
        build_plan(mesh, StencilOrder.FOURTH, shift=1.0, diffusion=1.0)  # needs 2 ghosts


def test_mesh_mismatch_rejected():
    mesh = make_mesh((4, 1, 1), (1, 1, 1))
    other = make_mesh((5, 1, 1), (1, 1, 1))
    plan = build_plan(mesh, StencilOrder.SECOND, shift=1.0, diffusion=1.0)
    with pytest.raises(ValueError):
        solve(plan, ScalarField.zeros(other))
    with pytest.raises(ValueError):
        solve_vector(plan, VectorField.zeros(other))


def test_cost_scales_near_linearly_with_n():
    # doubling one axis should cost at most ~2.6x (N log N scaling); two
    # consecutive doublings are probed because a single pair can straddle a
    # cache-size boundary on a shared machine
    def best_time(n):
        mesh = make_mesh((n, 16, 4), (1, 1, 1))
        plan = build_plan(mesh, StencilOrder.SECOND, shift=100.0, diffusion=1.0)
        rhs = ScalarField.from_interior(mesh, np.random.default_rng(0).standard_normal(mesh.dims))
        solve(plan, rhs)
        best = np.inf
        for _ in range(11):
            start = time.perf_counter()
            solve(plan, rhs)
            best = min(best, time.perf_counter() - start)
        return best

    t1 = best_time(1024)
    t2 = best_time(2048)
    t4 = best_time(4096)
    assert min(t2 / t1, t4 / t2) <= 2.6
