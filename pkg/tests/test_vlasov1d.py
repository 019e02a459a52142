import math

import numpy as np
import pytest

from hermstab.basis import BasisParams, VelocityGrid, psi_table, quadrature_grid
from hermstab.gram import gram_matrix_stable
from hermstab.integrator import LinearSolverConfig, cn_step
from hermstab.operators import (
    build_B,
    build_B_projection,
    build_D,
    build_D_projection,
)
from hermstab.vlasov1d import (
    MASS_COEFF,
    FieldState,
    KineticState,
    SpatialGrid,
    XAdvection,
    diagnostics,
    init_advection,
    init_two_stream,
    momentum_coeff,
    poisson_solve,
    reconstruct_on_grid,
    strang_step,
    v_advection_step,
    x_advection_step,
)

LU = LinearSolverConfig(method="lu")


def make_state(N, T, n_cells, length, fill=None):
    grid = SpatialGrid(length=length, n_cells=n_cells)
    basis = BasisParams(temperature=T, max_degree=N)
    U = np.zeros((n_cells, N + 1)) if fill is None else fill
    return KineticState(grid=grid, basis=basis, moments=U)


def test_mass_coefficient_is_psi0_integral():
    # integral psi_0 dv = pi^{1/4}, independent of T
    for T in (1.0, 2.0):
        grid = quadrature_grid(T)
        val = np.trapezoid(psi_table(0, grid.points, T)[0], grid.points)
        assert val == pytest.approx(MASS_COEFF, rel=1e-12)


def test_momentum_coefficient_is_v_psi1_integral():
    for T in (1.0, 2.0):
        grid = quadrature_grid(T)
        val = np.trapezoid(grid.points * psi_table(1, grid.points, T)[1], grid.points)
        assert val == pytest.approx(momentum_coeff(T), rel=1e-12)
    assert momentum_coeff(2.0) == pytest.approx(math.pi**0.25, rel=1e-14)


def test_kinetic_coefficients_match_quadrature():
    from hermstab.vlasov1d import _kinetic_coeffs

    for T in (1.0, 2.0):
        grid = quadrature_grid(T)
        table = psi_table(2, grid.points, T)
        c0 = np.trapezoid(grid.points**2 * table[0], grid.points)
        c2 = np.trapezoid(grid.points**2 * table[2], grid.points)
        exp0, exp2 = _kinetic_coeffs(T)
        assert c0 == pytest.approx(exp0, rel=1e-12)
        assert c2 == pytest.approx(exp2, rel=1e-12)


def test_poisson_single_mode():
    L, nc = 10.0, 64
    state = make_state(2, 1.0, nc, L)
    x = state.grid.cell_centers
    k1 = 2.0 * math.pi / L
    state.moments[:, 0] = (3.0 + np.cos(k1 * x)) / MASS_COEFF
    field = poisson_solve(state)
    assert np.allclose(field.potential, np.cos(k1 * x) / k1**2, atol=1e-12)
    assert np.allclose(field.electric_field, np.sin(k1 * x) / k1, atol=1e-12)
    assert abs(field.electric_field.mean()) < 1e-14
    assert field.background_density == pytest.approx(3.0, rel=1e-13)


def test_poisson_uniform_density():
    state = make_state(2, 1.0, 16, 5.0)
    state.moments[:, 0] = 7.0
    field = poisson_solve(state)
    assert np.allclose(field.electric_field, 0.0, atol=1e-13)
    assert np.allclose(field.potential, 0.0, atol=1e-13)


def test_v_advection_zero_field():
    state = make_state(8, 1.0, 8, 4.0)
    state.moments[:] = np.arange(8 * 9).reshape(8, 9) / 10.0
    field = FieldState(np.zeros(8), np.zeros(8), 0.0)
    out = v_advection_step(state, field, build_D_projection(8, 1.0, 1.0), 0.1)
    assert np.allclose(out.moments, state.moments, atol=1e-15)


def test_v_advection_reduces_to_cn_step():
    N, T, dt = 6, 2.0, 0.05
    unit = build_D_projection(N, 1.0, T)
    rng = np.random.default_rng(9)
    U0 = rng.standard_normal(N + 1)
    state = make_state(N, T, 1, 1.0, U0[None, :].copy())
    field = FieldState(np.array([1.0]), np.zeros(1), 0.0)
    out = v_advection_step(state, field, unit, dt)
    assert np.allclose(out.moments[0], cn_step(U0, unit, dt, LU), atol=1e-13)


def test_v_advection_cells_independent():
    N, T, dt = 5, 1.0, 0.1
    unit = build_D_projection(N, 1.0, T)
    rng = np.random.default_rng(10)
    U = rng.standard_normal((3, N + 1))
    E = np.array([0.3, -1.2, 2.0])
    state = make_state(N, T, 3, 3.0, U.copy())
    out = v_advection_step(state, FieldState(E, np.zeros(3), 0.0), unit, dt)
    for j in range(3):
        scaled = type(unit)(
            kind=unit.kind, method=unit.method, n_moments=unit.n_moments,
            temperature=unit.temperature, matrix=E[j] * unit.matrix, field_sign=E[j],
        )
        assert np.allclose(out.moments[j], cn_step(U[j], scaled, dt, LU), atol=1e-12)


def test_x_advection_uniform_state():
    N = 6
    state = make_state(N, 1.0, 16, 8.0)
    state.moments[:] = np.arange(N + 1.0)[None, :]
    out = x_advection_step(state, build_B_projection(N, 1.0), 0.1)
    assert np.allclose(out.moments, state.moments, atol=1e-12)


def test_x_advection_n0_is_identity():
    state = make_state(0, 1.0, 8, 4.0)
    state.moments[:, 0] = np.sin(np.arange(8.0))
    out = x_advection_step(state, build_B(0, 1.0), 0.1)
    assert np.allclose(out.moments, state.moments, atol=1e-14)


def test_x_advection_conserves_a_norm():
    N, T, nc = 8, 2.0, 32
    A = gram_matrix_stable(N, T)
    grid = SpatialGrid(length=4.0 * math.pi, n_cells=nc)
    basis = BasisParams(temperature=T, max_degree=N)
    state = init_two_stream(grid, basis)
    Bbar = build_B_projection(N, T)
    stepper = XAdvection(grid, Bbar, 0.01)
    norm0 = None
    U = state.moments
    for _ in range(20):
        U = stepper.step(U)
        val = float(np.einsum("jm,mn,jn->", U, A.entries, U))
        if norm0 is None:
            norm0 = float(np.einsum("jm,mn,jn->", state.moments, A.entries, state.moments))
        assert abs(val - norm0) <= 1e-10 * abs(norm0)


def test_frozen_field_split_conserves_a_norm():
    # no Poisson refresh: v and x blocks each conserve the A-norm exactly
    N, T, nc = 16, 2.0, 16
    A = gram_matrix_stable(N, T)
    grid = SpatialGrid(length=4.0 * math.pi, n_cells=nc)
    basis = BasisParams(temperature=T, max_degree=N)
    state = init_two_stream(grid, basis)
    field = poisson_solve(state)
    unit = build_D_projection(N, 1.0, T)
    x_stepper = XAdvection(grid, build_B_projection(N, T), 0.01)
    dx = grid.dx

    def a_norm(U):
        return float(np.einsum("jm,mn,jn->", U, A.entries, U)) * dx

    q0 = a_norm(state.moments)
    for _ in range(100):
        state = v_advection_step(state, field, unit, 0.005)
        state.moments = x_stepper.step(state.moments)
        state = v_advection_step(state, field, unit, 0.005)
    assert abs(a_norm(state.moments) - q0) <= 1e-9 * abs(q0)


@pytest.mark.parametrize("method", ["raw", "proj", "proj_cons"])
def test_mass_conservation_over_strang_steps(method):
    # raw and (even-N) projection leave u_0 untouched in the velocity block;
    # the centered periodic x-differences telescope
    N, T, nc = 16, 2.0, 16
    grid = SpatialGrid(length=4.0 * math.pi, n_cells=nc)
    basis = BasisParams(temperature=T, max_degree=N)
    state = init_two_stream(grid, basis)
    cons = method == "proj_cons"
    if method == "raw":
        unit = build_D(N, 1.0, T)
        Bop = build_B(N, T)
    else:
        unit = build_D_projection(N, 1.0, T, conservative=cons)
        Bop = build_B_projection(N, T, conservative=cons)
    x_stepper = XAdvection(grid, Bop, 0.01)
    mass0 = MASS_COEFF * state.moments[:, 0].sum() * grid.dx
    field = poisson_solve(state)
    for _ in range(100):
        state, field = strang_step(state, unit, x_stepper, 0.01, field)
    mass = MASS_COEFF * state.moments[:, 0].sum() * grid.dx
    assert abs(mass - mass0) <= 1e-10 * abs(mass0)


def test_parity_budgets_under_v_advection():
    # The vanishing correction rows keep the physical budgets of the raw
    # ladder exact: for even N mass is frozen and the kinetic energy obeys
    # d(KE)/dt = e * momentum; for odd N the momentum obeys
    # d(P)/dt = e * mass.  The trapezoidal CN averages close the budgets
    # step by step to solver precision.
    from hermstab.vlasov1d import _kinetic_coeffs

    T, dt, e = 2.0, 0.02, 1.0
    grid = SpatialGrid(length=2.0, n_cells=4)
    field = FieldState(np.full(4, e), np.zeros(4), 0.0)
    rng = np.random.default_rng(12)
    dx = grid.dx
    c_mom = momentum_coeff(T)

    # even N: mass frozen, energy budget closed
    N = 16
    basis = BasisParams(temperature=T, max_degree=N)
    state = KineticState(grid, basis, rng.standard_normal((4, N + 1)))
    A = gram_matrix_stable(N, T)
    unit = build_D_projection(N, e, T)
    mass0 = diagnostics(state, A)["mass"]
    ke = diagnostics(state, A)["kinetic_energy"]
    ke_budget = ke
    for _ in range(50):
        prev = state
        state = v_advection_step(state, field, unit, dt)
        p_mid = 0.5 * (
            diagnostics(prev, A)["momentum"] + diagnostics(state, A)["momentum"]
        )
        ke_budget += e * dt * p_mid
    diag = diagnostics(state, A)
    assert abs(diag["mass"] - mass0) <= 1e-12 * max(1.0, abs(mass0))
    assert abs(diag["kinetic_energy"] - ke_budget) <= 1e-10 * max(1.0, abs(ke_budget))

    # odd N: momentum budget closed
    N = 15
    basis = BasisParams(temperature=T, max_degree=N)
    state = KineticState(grid, basis, rng.standard_normal((4, N + 1)))
    A = gram_matrix_stable(N, T)
    unit = build_D_projection(N, e, T)
    p_budget = diagnostics(state, A)["momentum"]
    for _ in range(50):
        prev = state
        state = v_advection_step(state, field, unit, dt)
        m_mid = 0.5 * (diagnostics(prev, A)["mass"] + diagnostics(state, A)["mass"])
        p_budget += e * dt * m_mid
    diag = diagnostics(state, A)
    assert abs(diag["momentum"] - p_budget) <= 1e-10 * max(1.0, abs(p_budget))


def test_strang_uniform_zero_field_identity():
    N, nc = 8, 16
    grid = SpatialGrid(length=8.0, n_cells=nc)
    basis = BasisParams(temperature=1.0, max_degree=N)
    U = np.tile(np.arange(N + 1.0), (nc, 1))
    state = KineticState(grid, basis, U.copy())
    unit = build_D_projection(N, 1.0, 1.0)
    x_stepper = XAdvection(grid, build_B_projection(N, 1.0), 0.1)
    out, _ = strang_step(state, unit, x_stepper, 0.1)
    assert np.allclose(out.moments, U, atol=1e-12)


def test_strang_zero_dt_identity():
    N, nc = 4, 8
    grid = SpatialGrid(length=4.0 * math.pi, n_cells=nc)
    basis = BasisParams(temperature=2.0, max_degree=N)
    state = init_two_stream(grid, basis)
    unit = build_D_projection(N, 1.0, 2.0)
    x_stepper = XAdvection(grid, build_B_projection(N, 2.0), 0.0)
    out, _ = strang_step(state, unit, x_stepper, 0.0)
    assert np.allclose(out.moments, state.moments, atol=1e-15)


def test_diagnostics_zero_state():
    state = make_state(6, 1.0, 8, 4.0)
    A = gram_matrix_stable(6, 1.0)
    diag = diagnostics(state, A)
    for key in ("mass", "momentum", "kinetic_energy", "l2_A", "l2_eps", "potential_energy"):
        assert diag[key] == 0.0


def test_diagnostics_potential_energy():
    state = make_state(2, 1.0, 4, 2.0)
    field = FieldState(np.array([1.0, -1.0, 1.0, -1.0]), np.zeros(4), 0.0)
    diag = diagnostics(state, gram_matrix_stable(2, 1.0), field)
    assert diag["potential_energy"] == pytest.approx(0.5 * 4 * 0.5, rel=1e-14)


def test_init_two_stream_values():
    grid = SpatialGrid(length=4.0 * math.pi, n_cells=32)
    basis = BasisParams(temperature=2.0, max_degree=64)
    state = init_two_stream(grid, basis)
    # at x = 0 the modulation is 2 + 0.02/1.2
    expected0 = (12.0 / 7.0) * (2.0 + 0.02 / 1.2)
    assert state.moments[0, 0] == pytest.approx(expected0, rel=1e-14)
    assert np.all(state.moments[:, 1] == 0.0)
    assert np.all(state.moments[:, 3:] == 0.0)
    # amplitude ratio u_2 : u_0 = 10 sqrt(2) : 12 at every cell
    assert np.allclose(
        12.0 * state.moments[:, 2],
        10.0 * math.sqrt(2.0) * state.moments[:, 0],
        rtol=1e-13, atol=1e-15,
    )


def test_init_two_stream_rejects_incommensurate_domain():
    grid = SpatialGrid(length=10.0, n_cells=16)
    basis = BasisParams(temperature=2.0, max_degree=8)
    with pytest.raises(ValueError):
        init_two_stream(grid, basis, k=0.5)


def test_init_advection():
    basis = BasisParams(temperature=2.0, max_degree=16)
    state = init_advection(basis)
    assert state.moments[0, 0] == 1.0
    assert np.all(state.moments[0, 1:] == 0.0)
    vgrid = VelocityGrid.uniform(-6.0, 6.0, 101)
    f = reconstruct_on_grid(state, vgrid)[0]
    expected = psi_table(0, vgrid.points, 2.0)[0]
    assert np.allclose(f, expected, atol=1e-15)
