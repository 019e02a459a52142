"""Truncated transport matrices and their stabilized modifications.

Velocity advection e df/dv yields the lower-bidiagonal ladder matrix D with
d_{m,m-1} = -e sqrt(2m/T); space advection v df/dx yields the symmetric
tridiagonal B with b_{m+1,m} = sqrt(T(m+1)/2).  Truncation to N + 1 moments
destroys the compatibility with the Gram matrix A (A D + D^T A = 0 and
A B symmetric hold only for the infinite matrices), which is what makes the
plain truncated scheme unstable in the L^2 norm.

Two repairs are implemented:

* projection: augment the last column by the stabilization vector z, the
  unique solution of A^N z = g^N where g^N couples the retained moments to
  the first discarded one.  z has a closed form and touches nothing but the
  last column.
* penalization: conjugate with (A + eps I), e.g.
  D_bar = D/2 - (A + eps I)^{-1} D^T (A + eps I) / 2, which is skew with
  respect to the regularized metric by construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .gram import GramMatrix, gram_matrix_mp

__all__ = [
    "KIND_VELOCITY",
    "KIND_SPACE",
    "METHOD_RAW",
    "METHOD_PROJECTION",
    "METHOD_PROJECTION_CONSERVATIVE",
    "METHOD_PENALIZED",
    "DEFAULT_EPSILON",
    "TransportOperator",
    "StabilizationVector",
    "build_D",
    "build_B",
    "build_z",
    "build_z_by_solve",
    "build_D_projection",
    "build_D_penalized",
    "build_B_projection",
    "build_B_penalized",
]

KIND_VELOCITY = "d"
KIND_SPACE = "b"

METHOD_RAW = "raw"
METHOD_PROJECTION = "proj"
METHOD_PROJECTION_CONSERVATIVE = "proj_cons"
METHOD_PENALIZED = "pen"

DEFAULT_EPSILON = 1e-10

# Exact integer factorial ratios stay inside double range up to here;
# beyond, fall back to log-gamma.
_EXACT_Z_LIMIT = 150


@dataclass(frozen=True)
class TransportOperator:
    """A transport matrix together with how it was built."""

    kind: str
    method: str
    n_moments: int
    temperature: float
    matrix: np.ndarray = field(repr=False)
    field_sign: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.n_moments, self.n_moments):
            raise ValueError(f"matrix shape {m.shape} does not match n_moments {self.n_moments}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def max_degree(self) -> int:
        return self.n_moments - 1


@dataclass(frozen=True)
class StabilizationVector:
    """Last-column correction vector z with its checkerboard structure.

    For even N only odd-index entries are nonzero; for odd N only
    even-index entries are.
    """

    n_moments: int
    z: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != (self.n_moments,):
            raise ValueError("z length does not match n_moments")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)


def build_D(N: int, e: float, T: float) -> TransportOperator:
    """Raw velocity-advection matrix: entry (m, m-1) = -e sqrt(2m/T)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if T <= 0.0:
        raise ValueError("T must be positive")
    D = np.zeros((N + 1, N + 1))
    for m in range(1, N + 1):
        D[m, m - 1] = -e * math.sqrt(2.0 * m / T)
    return TransportOperator(
        kind=KIND_VELOCITY, method=METHOD_RAW, n_moments=N + 1, temperature=T,
        matrix=D, field_sign=e,
    )


def build_B(N: int, T: float) -> TransportOperator:
    """Raw space-advection matrix: symmetric tridiagonal, (m+1, m) = sqrt(T(m+1)/2)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if T <= 0.0:
        raise ValueError("T must be positive")
    B = np.zeros((N + 1, N + 1))
    for m in range(N):
        B[m + 1, m] = B[m, m + 1] = math.sqrt(T * (m + 1) / 2.0)
    return TransportOperator(
        kind=KIND_SPACE, method=METHOD_RAW, n_moments=N + 1, temperature=T, matrix=B,
    )


def _z_entry_exact(num_hi: int, num_lo: int, den_pow: int, den_fact: int) -> float:
    # -sqrt(num_hi!/num_lo!) / (4^den_pow den_fact!), one rounding via Fraction
    p = math.factorial(num_hi) // math.factorial(num_lo)
    q = 4**den_pow * math.factorial(den_fact)
    return -math.sqrt(float(Fraction(p, q * q)))


def _z_entry_log(num_hi: int, num_lo: int, den_pow: int, den_fact: int) -> float:
    log_mag = (
        0.5 * (math.lgamma(num_hi + 1) - math.lgamma(num_lo + 1))
        - den_pow * math.log(4.0)
        - math.lgamma(den_fact + 1)
    )
    return -math.exp(log_mag)


def build_z(N: int) -> StabilizationVector:
    """Closed-form stabilization vector, independent of T.

    Even N = 2M:   z_{2k+1} = -sqrt((2M+1)!/(2k+1)!) / (4^{M-k} (M-k)!),
    odd  N = 2M-1: z_{2k}   = -sqrt((2M)!/(2k)!)     / (4^{M-k} (M-k)!),
    for 0 <= k < M; the opposite parity class is identically zero.

    Exact integer ratios (one float rounding) up to N = 150, log-gamma
    beyond; the exact path keeps the last-column skew defect at the
    rounding floor of A and D themselves.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    entry = _z_entry_exact if N <= _EXACT_Z_LIMIT else _z_entry_log
    z = np.zeros(N + 1)
    if N % 2 == 0:
        M = N // 2
        for k in range(M):
            z[2 * k + 1] = entry(2 * M + 1, 2 * k + 1, M - k, M - k)
    else:
        M = (N + 1) // 2
        for k in range(M):
            z[2 * k] = entry(2 * M, 2 * k, M - k, M - k)
    return StabilizationVector(n_moments=N + 1, z=z)


def build_z_by_solve(N: int, T: float, A: GramMatrix) -> StabilizationVector:
    """Independent oracle for build_z: solve A^N z = g^N directly.

    g^N is the column (a_{m,N+1})_{m<=N} coupling retained to discarded
    moments.  cond(A^N) exceeds 1/eps beyond N ~ 32, so the solve runs in
    mpmath at a precision scaled with N; a double-precision solve would be
    meaningless already at N = 24.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if A.max_degree != N or A.temperature != T:
        raise ValueError(
            f"Gram matrix was built for N={A.max_degree}, T={A.temperature}, "
            f"expected N={N}, T={T}"
        )
    mp = mpmath.mp
    old_dps = mp.dps
    try:
        mp.dps = max(50, 40 + N)
        big = gram_matrix_mp(N + 1, T, mpmath)
        Asub = big[:N + 1, :N + 1]
        g = mpmath.matrix([big[m, N + 1] for m in range(N + 1)])
        try:
            z_mp = mpmath.lu_solve(Asub, g)
        except Exception as exc:
            cond = float(np.linalg.cond(A.entries))
            raise np.linalg.LinAlgError(
                f"Gram system solve failed for N={N} (double-precision condition "
                f"estimate {cond:.3e})"
            ) from exc
        z = np.array([float(z_mp[m]) for m in range(N + 1)])
    finally:
        mp.dps = old_dps
    return StabilizationVector(n_moments=N + 1, z=z)


def _corrected_z(N: int, conservative: bool) -> np.ndarray:
    z = build_z(N).z.copy()
    if conservative:
        # restores machine-exact mass/momentum/energy rows; the nullified
        # coefficients are O(1e-5) and below for N around 40
        z[0:3] = 0.0
    return z


def build_D_projection(N: int, e: float, T: float, conservative: bool = False) -> TransportOperator:
    """Projection-stabilized velocity matrix.

    D_bar = D - e sqrt(2(N+1)/T) Y where Y is zero except for its last
    column, which holds z; A^N D_bar is then exactly skew-symmetric.
    """
    if N < 1:
        raise ValueError("N must be >= 1 for the projection method")
    z = _corrected_z(N, conservative)
    D = build_D(N, e, T).matrix.copy()
    D[:, N] -= e * math.sqrt(2.0 * (N + 1) / T) * z
    method = METHOD_PROJECTION_CONSERVATIVE if conservative else METHOD_PROJECTION
    return TransportOperator(
        kind=KIND_VELOCITY, method=method, n_moments=N + 1, temperature=T,
        matrix=D, field_sign=e,
    )


def build_B_projection(N: int, T: float, conservative: bool = False) -> TransportOperator:
    """Projection-stabilized space matrix B_bar = B + sqrt(T(N+1)/2) Y.

    Uses the proportionality of the discarded-moment couplings of B and D;
    A^N B_bar is symmetric.
    """
    if N < 1:
        raise ValueError("N must be >= 1 for the projection method")
    z = _corrected_z(N, conservative)
    B = build_B(N, T).matrix.copy()
    B[:, N] += math.sqrt(T * (N + 1) / 2.0) * z
    method = METHOD_PROJECTION_CONSERVATIVE if conservative else METHOD_PROJECTION
    return TransportOperator(
        kind=KIND_SPACE, method=method, n_moments=N + 1, temperature=T, matrix=B,
    )


def _regularized_metric(A: GramMatrix, epsilon: float) -> np.ndarray:
    if epsilon <= 0.0:
        raise ValueError("penalization requires epsilon > 0")
    M = A.entries + epsilon * np.eye(A.n_moments)
    cond = np.linalg.cond(M)
    if cond > 1e14:
        warnings.warn(
            f"regularized Gram matrix is badly conditioned: cond(A + eps I) = {cond:.3e}",
            RuntimeWarning,
            stacklevel=3,
        )
    return M


def build_D_penalized(N: int, e: float, T: float, epsilon: float, A: GramMatrix) -> TransportOperator:
    """Penalized velocity matrix D_bar = D/2 - (A+eps I)^{-1} D^T (A+eps I) / 2."""
    if A.max_degree != N or A.temperature != T:
        raise ValueError("Gram matrix parameters do not match N, T")
    M = _regularized_metric(A, epsilon)
    D = build_D(N, e, T).matrix
    Dbar = 0.5 * D - 0.5 * np.linalg.solve(M, D.T @ M)
    return TransportOperator(
        kind=KIND_VELOCITY, method=METHOD_PENALIZED, n_moments=N + 1, temperature=T,
        matrix=Dbar, field_sign=e, epsilon=epsilon,
    )


def build_B_penalized(N: int, T: float, epsilon: float, A: GramMatrix) -> TransportOperator:
    """Penalized space matrix B_bar = B/2 + (A+eps I)^{-1} B (A+eps I) / 2."""
    if A.max_degree != N or A.temperature != T:
        raise ValueError("Gram matrix parameters do not match N, T")
    M = _regularized_metric(A, epsilon)
    B = build_B(N, T).matrix
    Bbar = 0.5 * B + 0.5 * np.linalg.solve(M, B @ M)
    return TransportOperator(
        kind=KIND_SPACE, method=METHOD_PENALIZED, n_moments=N + 1, temperature=T,
        matrix=Bbar, epsilon=epsilon,
    )
