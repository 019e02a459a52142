"""1D1V Vlasov-Poisson solver on moment vectors by operator splitting.

Space is discretized with second-order centered finite differences on a
periodic grid, one moment vector per cell.  A full step alternates the
velocity-advection block (E(x) df/dv, cell-local ladder operators) and the
space-advection block (v df/dx, tridiagonal-in-x coupling), with a
spectral Poisson refresh after every sub-step that changes the density.

Sign conventions: the charge density is rho = c_mass u_0 with the fixed
neutralizing background rho_bar = mean(rho); the field solves

    d^2 phi / dx^2 = -(rho - rho_bar),   E = -d phi / dx,

and the velocity block advances df/dt + E(x) df/dv = 0 with the local
field value as the ladder coefficient.  This pairing makes density bumps
repel, which is what drives the two-stream growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator

from .basis import BasisParams, VelocityGrid, psi_table
from .gram import GramMatrix
from .integrator import (
    SOLVER_DENSE_LU,
    SOLVER_GMRES,
    LinearSolverConfig,
    NonConvergence,
    SingularSystem,
    _gmres,
)
from .operators import KIND_SPACE, KIND_VELOCITY, TransportOperator

__all__ = [
    "MASS_COEFF",
    "momentum_coeff",
    "SpatialGrid",
    "FieldState",
    "KineticState",
    "poisson_solve",
    "v_advection_step",
    "x_advection_step",
    "XAdvection",
    "strang_step",
    "diagnostics",
    "init_two_stream",
    "init_advection",
    "reconstruct_on_grid",
]

# integral psi_0 dv = pi^{1/4}, independent of T
MASS_COEFF = math.pi**0.25

# x-systems up to this size are solved by a cached dense factorization
_DENSE_X_LIMIT = 2048


def momentum_coeff(T: float) -> float:
    """integral v psi_1 dv = sqrt(T/2) pi^{1/4}."""
    return math.sqrt(T / 2.0) * MASS_COEFF


def _kinetic_coeffs(T: float) -> tuple[float, float]:
    # integral v^2 psi_m dv for m = 0, 2
    return (T / 2.0) * MASS_COEFF, (T / math.sqrt(2.0)) * MASS_COEFF


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid of n_cells cells on [0, L)."""

    length: float
    n_cells: int
    periodic: bool = True

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("length must be positive")
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def cell_centers(self) -> np.ndarray:
        return np.arange(self.n_cells) * self.dx


@dataclass(frozen=True)
class FieldState:
    """Electric field and potential samples, both gauge-fixed to mean zero."""

    electric_field: np.ndarray = field(repr=False)
    potential: np.ndarray = field(repr=False)
    background_density: float = 0.0


@dataclass
class KineticState:
    """Moment vectors for every cell: moments[j, m] = u_m at cell j."""

    grid: SpatialGrid
    basis: BasisParams
    moments: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.moments, dtype=float)
        expected = (self.grid.n_cells, self.basis.n_moments)
        if m.shape != expected:
            raise ValueError(f"moments shape {m.shape}, expected {expected}")
        self.moments = m

    def copy(self) -> "KineticState":
        return KineticState(self.grid, self.basis, self.moments.copy(), self.time)


def poisson_solve(state: KineticState) -> FieldState:
    """Periodic Poisson solve by discrete Fourier inversion.

    Global neutrality is enforced by subtracting the mean charge; phi and E
    are mean-zero by construction.
    """
    grid = state.grid
    if grid.n_cells < 4:
        raise ValueError("Poisson solve needs at least 4 cells")
    rho = MASS_COEFF * state.moments[:, 0]
    background = float(rho.mean())
    rho_hat = np.fft.rfft(rho - background)
    k = 2.0 * math.pi * np.fft.rfftfreq(grid.n_cells, d=grid.dx)
    phi_hat = np.zeros_like(rho_hat)
    phi_hat[1:] = rho_hat[1:] / k[1:] ** 2
    e_hat = -1j * k * phi_hat
    phi = np.fft.irfft(phi_hat, n=grid.n_cells)
    efield = np.fft.irfft(e_hat, n=grid.n_cells)
    return FieldState(electric_field=efield, potential=phi, background_density=background)


def v_advection_step(
    state: KineticState,
    fieldstate: FieldState,
    unit_op: TransportOperator,
    dt: float,
) -> KineticState:
    """Advance every cell one CN step of du/dt + e_j D_unit u = 0.

    `unit_op` is the velocity operator built for e = 1; the matrix scales
    linearly with the local field value e_j = E(x_j).  Cells are
    independent; the batched dense solves share one LAPACK call.
    """
    if unit_op.kind != KIND_VELOCITY:
        raise ValueError("v_advection_step needs a velocity-kind operator")
    if unit_op.n_moments != state.basis.n_moments:
        raise ValueError("operator size does not match state")
    E = np.asarray(fieldstate.electric_field, dtype=float)
    if E.shape != (state.grid.n_cells,):
        raise ValueError("field length does not match grid")
    U = state.moments
    D = unit_op.matrix
    half = 0.5 * dt * E[:, None, None] * D[None, :, :]
    eye = np.eye(unit_op.n_moments)
    rhs = U[:, :, None] - half @ U[:, :, None]
    systems = eye[None, :, :] + half
    try:
        new = np.linalg.solve(systems, rhs)[:, :, 0]
    except np.linalg.LinAlgError as exc:
        bad = [j for j in range(E.size) if abs(np.linalg.det(systems[j])) < 1e-300]
        raise SingularSystem(f"velocity CN solve failed at cells {bad}: {exc}") from exc
    out = state.copy()
    out.moments = new
    out.time = state.time + dt
    return out


def _centered_dx(W: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(W, -1, axis=0) - np.roll(W, 1, axis=0)) / (2.0 * dx)


class XAdvection:
    """Space-advection CN stepper with a fixed operator and step size.

    The coupled system is (I + dt/2 Dx (x) B) U = (I - dt/2 Dx (x) B) U with
    Dx the centered periodic difference.  Small systems use one cached dense
    factorization; larger ones use matrix-free GMRES warm-started with the
    previous solution.
    """

    def __init__(
        self,
        grid: SpatialGrid,
        op: TransportOperator,
        dt: float,
        config: Optional[LinearSolverConfig] = None,
    ):
        if op.kind != KIND_SPACE:
            raise ValueError("x advection needs a space-kind operator")
        if grid.n_cells < 3:
            raise ValueError("x advection needs at least 3 cells")
        self.grid = grid
        self.op = op
        self.dt = dt
        n_unknowns = grid.n_cells * op.n_moments
        if config is None:
            method = SOLVER_DENSE_LU if n_unknowns <= _DENSE_X_LIMIT else SOLVER_GMRES
            config = LinearSolverConfig(method=method)
        self.config = config
        self._B = op.matrix
        self._dx = grid.dx
        self._lu = None
        if config.method == SOLVER_DENSE_LU:
            nc = grid.n_cells
            Dx = np.zeros((nc, nc))
            idx = np.arange(nc)
            Dx[idx, (idx + 1) % nc] = 1.0 / (2.0 * self._dx)
            Dx[idx, (idx - 1) % nc] = -1.0 / (2.0 * self._dx)
            system = np.eye(n_unknowns) + 0.5 * dt * np.kron(Dx, self._B)
            try:
                self._lu = scipy.linalg.lu_factor(system)
            except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
                raise SingularSystem(str(exc)) from exc
        else:
            self._linop = LinearOperator(
                (n_unknowns, n_unknowns), matvec=self._matvec, dtype=float
            )

    def _apply(self, W: np.ndarray) -> np.ndarray:
        return _centered_dx(W, self._dx) @ self._B.T

    def _matvec(self, w: np.ndarray) -> np.ndarray:
        W = w.reshape(self.grid.n_cells, -1)
        return (W + 0.5 * self.dt * self._apply(W)).ravel()

    def step(self, U: np.ndarray) -> np.ndarray:
        rhs = U - 0.5 * self.dt * self._apply(U)
        if self._lu is not None:
            return scipy.linalg.lu_solve(self._lu, rhs.ravel()).reshape(U.shape)
        sol = _gmres(self._linop, rhs.ravel(), self.config, U.ravel().copy())
        return sol.reshape(U.shape)


def x_advection_step(
    state: KineticState,
    op: TransportOperator,
    dt: float,
    config: Optional[LinearSolverConfig] = None,
) -> KineticState:
    """One CN step of dU/dt + B dU/dx = 0 on the periodic grid."""
    stepper = XAdvection(state.grid, op, dt, config)
    out = state.copy()
    out.moments = stepper.step(state.moments)
    out.time = state.time + dt
    return out


def strang_step(
    state: KineticState,
    unit_D: TransportOperator,
    x_stepper: XAdvection,
    dt: float,
    fieldstate: Optional[FieldState] = None,
) -> tuple[KineticState, FieldState]:
    """Strang-split Vlasov-Poisson step.

    Fixed order: half v-advection, Poisson refresh, full x-advection,
    Poisson refresh, half v-advection, final refresh.  Refreshes after the
    v halves are no-ops whenever the velocity operator leaves u_0 alone
    (even N with the projection method).
    """
    if fieldstate is None:
        fieldstate = poisson_solve(state)
    t0 = state.time
    out = v_advection_step(state, fieldstate, unit_D, 0.5 * dt)
    fieldstate = poisson_solve(out)
    out.moments = x_stepper.step(out.moments)
    fieldstate = poisson_solve(out)
    out = v_advection_step(out, fieldstate, unit_D, 0.5 * dt)
    fieldstate = poisson_solve(out)
    out.time = t0 + dt
    return out, fieldstate


def diagnostics(
    state: KineticState,
    A: GramMatrix,
    fieldstate: Optional[FieldState] = None,
    epsilon: float = 0.0,
) -> dict:
    """Physical and quadratic-norm monitors, all integrated over x.

    mass and momentum weight u_0 and u_1; the kinetic energy combines u_0
    and u_2.  l2_A is the discrete integral of f^2 over phase space,
    l2_eps adds the eps ||U||^2 regularization monitored by the penalized
    method.
    """
    if A.n_moments != state.basis.n_moments:
        raise ValueError("Gram matrix size does not match state")
    T = state.basis.temperature
    dx = state.grid.dx
    U = state.moments
    c0, c2 = _kinetic_coeffs(T)
    u0 = U[:, 0]
    u1 = U[:, 1] if state.basis.n_moments > 1 else np.zeros_like(u0)
    u2 = U[:, 2] if state.basis.n_moments > 2 else np.zeros_like(u0)
    l2_a = float(np.einsum("jm,mn,jn->", U, A.entries, U)) * dx
    l2_eps = l2_a + epsilon * float(np.einsum("jm,jm->", U, U)) * dx
    if fieldstate is not None:
        pot = 0.5 * float(np.sum(fieldstate.electric_field**2)) * dx
    else:
        pot = 0.0
    return {
        "mass": MASS_COEFF * float(u0.sum()) * dx,
        "momentum": momentum_coeff(T) * float(u1.sum()) * dx,
        "kinetic_energy": 0.5 * float((c0 * u0 + c2 * u2).sum()) * dx,
        "l2_A": l2_a,
        "l2_eps": l2_eps,
        "potential_energy": pot,
    }


def init_two_stream(
    grid: SpatialGrid,
    basis: BasisParams,
    k: float = 0.5,
    alpha: float = 0.01,
) -> KineticState:
    """Two-stream initial data: u_0 and u_2 modulated, all other moments zero.

        u_0(x) = (12/7)  (1 + cos kx + alpha (cos 2kx + cos 3kx) / 1.2)
        u_2(x) = (10 sqrt(2)/7) (same modulation)

    The grid length must hold an integer number of primary wavelengths.
    """
    if basis.max_degree < 2:
        raise ValueError("two-stream data needs at least moments u_0..u_2")
    periods = grid.length * k / (2.0 * math.pi)
    if abs(periods - round(periods)) > 1e-9 or round(periods) < 1:
        raise ValueError(
            f"domain length {grid.length} does not hold an integer number of "
            f"wavelengths 2*pi/k = {2.0 * math.pi / k}"
        )
    x = grid.cell_centers
    modulation = 1.0 + np.cos(k * x) + alpha * (np.cos(2 * k * x) + np.cos(3 * k * x)) / 1.2
    U = np.zeros((grid.n_cells, basis.n_moments))
    U[:, 0] = (12.0 / 7.0) * modulation
    U[:, 2] = (10.0 * math.sqrt(2.0) / 7.0) * modulation
    return KineticState(grid=grid, basis=basis, moments=U)


def init_advection(basis: BasisParams) -> KineticState:
    """Single-cell pure-Gaussian state U = (1, 0, ..., 0) for the advection test."""
    grid = SpatialGrid(length=1.0, n_cells=1)
    U = np.zeros((1, basis.n_moments))
    U[0, 0] = 1.0
    return KineticState(grid=grid, basis=basis, moments=U)


def reconstruct_on_grid(state: KineticState, vgrid: VelocityGrid) -> np.ndarray:
    """f(x_j, v_i) for every cell, shape (n_cells, n_points)."""
    table = psi_table(state.basis.max_degree, vgrid.points, state.basis.temperature)
    return state.moments @ table
