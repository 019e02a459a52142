"""Stabilized asymmetric-Hermite moment methods for kinetic transport.

The library evaluates the asymmetric Hermite basis and its Gram matrix in
closed form, builds the truncated velocity/space transport matrices, and
repairs the quadratic (L^2) instability of plain truncation by either a
last-column projection or a metric penalization.  A Crank-Nicolson
integrator and a 1D1V Vlasov-Poisson splitting driver sit on top, with a
CLI for matrix dumps and the reference experiments.
"""

from .basis import (
    BasisParams,
    VelocityGrid,
    eval_hermite_poly,
    eval_phi,
    eval_psi,
    eval_psi_dual,
    project,
    psi_dual_table,
    psi_table,
    quadrature_grid,
    reconstruct,
)
from .gram import (
    GramMatrix,
    gram_asymptotic_check,
    gram_entry_closed,
    gram_entry_oracle,
    gram_matrix_stable,
)
from .integrator import (
    CrankNicolson,
    LinearSolverConfig,
    NonConvergence,
    SingularSystem,
    cn_step,
    default_solver_config,
    linear_solve,
    weighted_norm,
)
from .operators import (
    DEFAULT_EPSILON,
    StabilizationVector,
    TransportOperator,
    build_B,
    build_B_penalized,
    build_B_projection,
    build_D,
    build_D_penalized,
    build_D_projection,
    build_z,
    build_z_by_solve,
)
from .vlasov1d import (
    FieldState,
    KineticState,
    SpatialGrid,
    XAdvection,
    diagnostics,
    init_advection,
    init_two_stream,
    poisson_solve,
    reconstruct_on_grid,
    strang_step,
    v_advection_step,
    x_advection_step,
)

__version__ = "0.1.0"
