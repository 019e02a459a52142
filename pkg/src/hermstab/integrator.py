"""Crank-Nicolson stepping, linear solvers and quadratic-norm monitors.

The fully discrete scheme for dU/dt + S U = 0 is

    (I + dt/2 S) U^{n+1} = (I - dt/2 S) U^n,

which conserves any quadratic form <U, G U> with G S + S^T G = 0 exactly,
independent of the step size.  No CFL condition is imposed; stability is
the operator's job.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .gram import GramMatrix
from .operators import TransportOperator

__all__ = [
    "SOLVER_DENSE_LU",
    "SOLVER_GMRES",
    "LinearSolverConfig",
    "NonConvergence",
    "SingularSystem",
    "default_solver_config",
    "linear_solve",
    "cn_step",
    "CrankNicolson",
    "weighted_norm",
]

SOLVER_DENSE_LU = "lu"
SOLVER_GMRES = "gmres"

# dense factorization is exact and cheap up to this many unknowns
_DENSE_DEFAULT_LIMIT = 512


class NonConvergence(RuntimeError):
    """Iterative solver failed to reach the requested residual."""

    def __init__(self, iterations: int, residual: float, context: str = ""):
        where = f" ({context})" if context else ""
        super().__init__(
            f"no convergence after {iterations} iterations, residual {residual:.3e}{where}"
        )
        self.iterations = iterations
        self.residual = residual
        self.context = context

    def with_context(self, context: str) -> "NonConvergence":
        return NonConvergence(self.iterations, self.residual, context)


class SingularSystem(RuntimeError):
    """Direct factorization broke down."""


@dataclass(frozen=True)
class LinearSolverConfig:
    method: str = SOLVER_DENSE_LU
    tolerance: float = 1e-12
    max_iterations: int = 5000
    restart: int = 50

    def __post_init__(self):
        if self.method not in (SOLVER_DENSE_LU, SOLVER_GMRES):
            raise ValueError(f"unknown solver method {self.method!r}")
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError("tolerance must be in (0, 1)")
        if self.restart > self.max_iterations:
            raise ValueError("restart must not exceed max_iterations")


def default_solver_config(n_unknowns: int) -> LinearSolverConfig:
    """Dense LU up to 512 unknowns, GMRES(50) at tolerance 1e-12 above."""
    if n_unknowns <= _DENSE_DEFAULT_LIMIT:
        return LinearSolverConfig(method=SOLVER_DENSE_LU)
    return LinearSolverConfig(method=SOLVER_GMRES, tolerance=1e-12, restart=50)


def _gmres(op, rhs: np.ndarray, config: LinearSolverConfig, guess) -> np.ndarray:
    # unpreconditioned by design; a preconditioner would be passed to
    # scipy's gmres via M= here if one is ever needed
    iters = 0

    def count(_):
        nonlocal iters
        iters += 1

    x, info = scipy.sparse.linalg.gmres(
        op,
        rhs,
        x0=guess,
        rtol=config.tolerance,
        atol=0.0,
        restart=config.restart,
        maxiter=max(1, config.max_iterations // max(1, config.restart)),
        callback=count,
        callback_type="pr_norm",
    )
    if info != 0:
        if hasattr(op, "dot"):
            res = float(np.linalg.norm(rhs - op.dot(x)))
        else:
            res = float(np.linalg.norm(rhs - op @ x))
        raise NonConvergence(iters, res / max(np.linalg.norm(rhs), 1e-300))
    return x


def linear_solve(
    M,
    rhs,
    config: Optional[LinearSolverConfig] = None,
    guess=None,
) -> np.ndarray:
    """Solve M x = rhs; M may be a dense array or a scipy LinearOperator.

    Deterministic for identical inputs.  The GMRES path uses `guess` as the
    warm start; dense LU ignores it.
    """
    rhs = np.asarray(rhs, dtype=float)
    if config is None:
        config = default_solver_config(rhs.size)
    if config.method == SOLVER_DENSE_LU:
        M = np.asarray(M, dtype=float)
        try:
            return scipy.linalg.solve(M, rhs)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise SingularSystem(str(exc)) from exc
    return _gmres(M, rhs, config, guess)


class CrankNicolson:
    """One-operator Crank-Nicolson stepper with a cached factorization.

    The system matrix is assembled once per (operator, dt); repeated steps
    reuse the LU factors (or the assembled matrix for GMRES).
    """

    def __init__(
        self,
        op: Union[TransportOperator, np.ndarray],
        dt: float,
        config: Optional[LinearSolverConfig] = None,
    ):
        if dt == 0.0:
            raise ValueError("dt must be nonzero")
        S = op.matrix if isinstance(op, TransportOperator) else np.asarray(op, dtype=float)
        n = S.shape[0]
        self.dt = dt
        self.config = config if config is not None else default_solver_config(n)
        eye = np.eye(n)
        self._lhs = eye + 0.5 * dt * S
        self._rhs_mat = eye - 0.5 * dt * S
        self._lu = None
        if self.config.method == SOLVER_DENSE_LU:
            try:
                self._lu = scipy.linalg.lu_factor(self._lhs)
            except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
                raise SingularSystem(str(exc)) from exc

    def step(self, U: np.ndarray, warm_start=None) -> np.ndarray:
        rhs = self._rhs_mat @ np.asarray(U, dtype=float)
        if self._lu is not None:
            return scipy.linalg.lu_solve(self._lu, rhs)
        guess = warm_start if warm_start is not None else U
        return _gmres(self._lhs, rhs, self.config, guess)


def cn_step(
    U,
    op: TransportOperator,
    dt: float,
    config: Optional[LinearSolverConfig] = None,
    warm_start=None,
) -> np.ndarray:
    """Advance one Crank-Nicolson step of dU/dt + op U = 0."""
    U = np.asarray(U, dtype=float)
    if U.shape != (op.n_moments,):
        raise ValueError(f"moment vector length {U.shape} does not match operator {op.n_moments}")
    return CrankNicolson(op, dt, config).step(U, warm_start=warm_start)


def weighted_norm(U, A: GramMatrix, epsilon: float = 0.0) -> float:
    """<U, A U> + eps ||U||^2, the discrete counterpart of integral f^2 dv."""
    U = np.asarray(U, dtype=float)
    if U.shape != (A.n_moments,):
        raise ValueError("moment vector length does not match Gram matrix")
    value = float(U @ (A.entries @ U))
    if epsilon:
        value += epsilon * float(U @ U)
    return value
