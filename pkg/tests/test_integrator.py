import math

import numpy as np
import pytest

from hermstab.gram import gram_matrix_stable
from hermstab.integrator import (
    SOLVER_DENSE_LU,
    SOLVER_GMRES,
    CrankNicolson,
    LinearSolverConfig,
    NonConvergence,
    SingularSystem,
    cn_step,
    default_solver_config,
    linear_solve,
    weighted_norm,
)
from hermstab.operators import TransportOperator, build_D, build_D_projection

LU = LinearSolverConfig(method=SOLVER_DENSE_LU)
GMRES = LinearSolverConfig(method=SOLVER_GMRES, tolerance=1e-12, restart=50)


def test_linear_solve_trivial():
    assert np.allclose(linear_solve(np.eye(3), [1.0, 2.0, 3.0], LU), [1, 2, 3])
    x = linear_solve(np.array([[2.0, 0.0], [0.0, 4.0]]), [2.0, 4.0], LU)
    assert np.allclose(x, [1.0, 1.0])


def test_linear_solve_cross_solver_agreement():
    rng = np.random.default_rng(11)
    M = np.eye(65) + 0.1 * rng.standard_normal((65, 65))
    rhs = rng.standard_normal(65)
    x_lu = linear_solve(M, rhs, LU)
    x_gm = linear_solve(M, rhs, GMRES)
    assert np.linalg.norm(x_lu - x_gm) <= 1e-9 * np.linalg.norm(x_lu)


def test_linear_solve_singular():
    M = np.ones((3, 3))
    with pytest.raises(SingularSystem):
        linear_solve(M, np.ones(3), LU)


def test_gmres_nonconvergence_reports():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((60, 60)) + 60 * np.eye(60) * 0.0  # non-diagonally-dominant
    cfg = LinearSolverConfig(method=SOLVER_GMRES, tolerance=1e-14, max_iterations=2, restart=2)
    with pytest.raises(NonConvergence) as info:
        linear_solve(M, rng.standard_normal(60), cfg)
    assert info.value.residual > 0.0


def test_solver_config_validation():
    with pytest.raises(ValueError):
        LinearSolverConfig(method="cg")
    with pytest.raises(ValueError):
        LinearSolverConfig(tolerance=2.0)
    with pytest.raises(ValueError):
        LinearSolverConfig(restart=100, max_iterations=10)
    assert default_solver_config(100).method == SOLVER_DENSE_LU
    assert default_solver_config(1000).method == SOLVER_GMRES


def test_cn_step_zero_operator():
    op = TransportOperator(kind="d", method="raw", n_moments=4, temperature=1.0,
                           matrix=np.zeros((4, 4)))
    U = np.array([1.0, -2.0, 0.5, 3.0])
    assert np.allclose(cn_step(U, op, 0.3, LU), U, atol=1e-15)


def test_cn_step_n0_density_frozen():
    op = build_D(0, 1.0, 1.0)
    assert cn_step(np.array([2.5]), op, 0.1, LU)[0] == 2.5


def test_cn_step_dimension_check():
    op = build_D(4, 1.0, 1.0)
    with pytest.raises(ValueError):
        cn_step(np.ones(3), op, 0.1, LU)


def test_cn_conserves_quadratic_form():
    # CN conserves <U, A U> exactly for operators skew w.r.t. A
    N, T = 8, 1.0
    A = gram_matrix_stable(N, T)
    op = build_D_projection(N, 1.0, T)
    rng = np.random.default_rng(1)
    U = rng.standard_normal(N + 1)
    q0 = weighted_norm(U, A)
    U1 = cn_step(U, op, 0.1, LU)
    assert abs(weighted_norm(U1, A) - q0) <= 1e-12 * abs(q0)


def test_cn_time_reversible():
    N, T = 12, 2.0
    op = build_D_projection(N, 1.0, T)
    rng = np.random.default_rng(2)
    U = rng.standard_normal(N + 1)
    forward = CrankNicolson(op, 0.1, LU)
    backward = CrankNicolson(op, -0.1, LU)
    U_back = backward.step(forward.step(U))
    assert np.linalg.norm(U_back - U) <= 1e-10 * np.linalg.norm(U)


def test_gmres_warm_start_consistent():
    rng = np.random.default_rng(8)
    M = np.eye(80) + 0.05 * rng.standard_normal((80, 80))
    rhs = rng.standard_normal(80)
    cold = linear_solve(M, rhs, GMRES)
    warm = linear_solve(M, rhs, GMRES, guess=cold + 1e-3 * rng.standard_normal(80))
    assert np.linalg.norm(cold - warm) <= 10 * GMRES.tolerance * np.linalg.norm(cold)


def test_cached_stepper_matches_cn_step():
    op = build_D_projection(6, -1.0, 1.0)
    stepper = CrankNicolson(op, 0.05, LU)
    rng = np.random.default_rng(4)
    U = rng.standard_normal(7)
    assert np.allclose(stepper.step(U), cn_step(U, op, 0.05, LU), atol=1e-15)


def test_raw_truncation_is_unstable_stabilized_is_not():
    # reversal protocol at desk scale: the raw operator amplifies the
    # A-norm while the projected one conserves it
    N, T, dt = 64, 2.0, 0.1
    A = gram_matrix_stable(N, T)

    def run(make_op):
        steppers = {e: CrankNicolson(make_op(e), dt, LU) for e in (1.0, -1.0)}
        U = np.zeros(N + 1)
        U[0] = 1.0
        drift = 0.0
        q0 = weighted_norm(U, A)
        for n in range(90):
            e = 1.0 if (n + 0.5) * dt < 4.5 else -1.0
            U = steppers[e].step(U)
        return weighted_norm(U, A) / q0

    ratio_raw = run(lambda e: build_D(N, e, T))
    ratio_proj = run(lambda e: build_D_projection(N, e, T))
    assert ratio_raw > 1.5
    assert abs(ratio_proj - 1.0) <= 1e-7
    assert (ratio_raw - 1.0) > 1e5 * abs(ratio_proj - 1.0)


def test_weighted_norm_values():
    A = gram_matrix_stable(4, 1.0)
    U = np.zeros(5)
    U[0] = 1.0
    assert weighted_norm(U, A) == pytest.approx(2.0**-0.5, rel=1e-14)
    assert weighted_norm(np.zeros(5), A) == 0.0
    A1 = gram_matrix_stable(1, 1.0)
    val = weighted_norm(np.array([0.0, 1.0]), A1, epsilon=1e-10)
    assert val == pytest.approx(0.3535533905932738 + 1e-10, rel=1e-12)
