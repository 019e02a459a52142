"""Asymmetric Hermite basis functions and the moment reconstruction operator.

Two dual families built on the physicists' Hermite polynomials H_m
(orthogonal for the weight e^{-v^2}, H_0 = 1, H_1 = 2x):

    psi_m(v)  = e^{-v^2/T} T^{-1/2} (2^m m! sqrt(pi))^{-1/2} H_m(v/sqrt(T))
    psi^m(v)  =                     (2^m m! sqrt(pi))^{-1/2} H_m(v/sqrt(T))

with the duality  integral psi_m psi^n dv = delta_{mn}.  The symmetric
(orthonormal in L^2) family is phi_m = e^{v^2/(2T)} T^{1/4} psi_m.

A profile f(v) = sum_m u_m psi_m is represented by its moment vector
(u_0, ..., u_N); `reconstruct` maps moments to point values and `project`
recovers a moment by quadrature against the dual family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BasisParams",
    "VelocityGrid",
    "eval_hermite_poly",
    "norm_constant",
    "eval_psi",
    "eval_psi_dual",
    "eval_phi",
    "psi_table",
    "psi_dual_table",
    "reconstruct",
    "project",
    "quadrature_grid",
]

_LOG_NORM_THRESHOLD = 30  # direct product of factors below, log-gamma above


@dataclass(frozen=True)
class BasisParams:
    """Reference temperature and truncation degree of the moment expansion.

    N is the highest retained moment index, so there are N + 1 moments.
    """

    temperature: float
    max_degree: int

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.max_degree < 0:
            raise ValueError(f"max_degree must be >= 0, got {self.max_degree}")

    @property
    def n_moments(self) -> int:
        return self.max_degree + 1


@dataclass(frozen=True)
class VelocityGrid:
    """Strictly increasing velocity samples used for reconstruction/quadrature."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least two points")
        if not np.all(np.diff(pts) > 0.0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.size

    @classmethod
    def uniform(cls, v_min: float, v_max: float, n_points: int) -> "VelocityGrid":
        return cls(np.linspace(v_min, v_max, n_points))


def quadrature_grid(T: float, half_width: float = 12.0, n_points: int = 4001) -> VelocityGrid:
    """Uniform grid on [-half_width*sqrt(T), half_width*sqrt(T)].

    Trapezoid sums on this grid are spectrally accurate for products of
    basis functions: the integrand is entire with Gaussian decay, so the
    Euler-Maclaurin correction terms vanish to machine precision.
    """
    w = half_width * math.sqrt(T)
    return VelocityGrid.uniform(-w, w, n_points)


def eval_hermite_poly(m: int, x: float) -> float:
    """H_m(x) by the three-term recurrence H_{m+1} = 2x H_m - 2m H_{m-1}.

    Overflows to IEEE infinity for extreme m, x; callers who need large
    degrees should work with the normalized families instead.
    """
    if m < 0:
        raise ValueError("degree must be nonnegative")
    if m == 0:
        return 1.0
    h_prev, h = 1.0, 2.0 * x
    for k in range(1, m):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


def norm_constant(m: int) -> float:
    """Normalization (2^m m! sqrt(pi))^{-1/2}, in log space for m > 30.

    The direct product overflows near m = 85 in double precision.
    """
    if m <= _LOG_NORM_THRESHOLD:
        return 1.0 / math.sqrt(2.0**m * math.factorial(m) * math.sqrt(math.pi))
    log_sq = m * math.log(2.0) + math.lgamma(m + 1) + 0.5 * math.log(math.pi)
    return math.exp(-0.5 * log_sq)


def _normalized_column(n_max: int, x: np.ndarray, start: np.ndarray) -> np.ndarray:
    """All degrees 0..n_max of a normalized Hermite family at points x.

    Shared stable recurrence: with c_m = (2^m m! sqrt(pi))^{-1/2} and any
    prefactor w(x) common to the family,

        psi_{m+1} = (sqrt(2) x psi_m - sqrt(m) psi_{m-1}) / sqrt(m+1).

    `start` is the degree-0 member w(x) * pi^{-1/4}.
    """
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = start
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for m in range(1, n_max):
        out[m + 1] = (math.sqrt(2.0) * x * out[m] - math.sqrt(m) * out[m - 1]) / math.sqrt(m + 1)
    return out


def psi_table(n_max: int, v, T: float) -> np.ndarray:
    """psi_0..psi_{n_max} evaluated at v, shape (n_max+1,) + v.shape."""
    v = np.asarray(v, dtype=float)
    x = v / math.sqrt(T)
    start = np.exp(-x * x) / (math.sqrt(T) * math.pi**0.25)
    return _normalized_column(n_max, x, start)


def psi_dual_table(n_max: int, v, T: float) -> np.ndarray:
    """Dual family psi^0..psi^{n_max} at v (pure polynomials, no weight)."""
    v = np.asarray(v, dtype=float)
    x = v / math.sqrt(T)
    start = np.full(x.shape, math.pi**-0.25)
    return _normalized_column(n_max, x, start)


def eval_psi(m: int, v: float, T: float) -> float:
    """Asymmetric basis function psi_m(v) for reference temperature T."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    return float(psi_table(m, np.asarray(v, dtype=float), T)[m])


def eval_psi_dual(m: int, v: float, T: float) -> float:
    """Dual basis function psi^m(v).

    Computed from the polynomial recurrence; the identity
    psi^m = e^{v^2/T} T^{1/2} psi_m is exact but overflows numerically.
    """
    if m < 0:
        raise ValueError("degree must be nonnegative")
    return float(psi_dual_table(m, np.asarray(v, dtype=float), T)[m])


def eval_phi(m: int, v: float, T: float) -> float:
    """Symmetric Hermite function phi_m = e^{-v^2/(2T)} T^{-1/4} psi^m."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(v, dtype=float) / math.sqrt(T)
    start = np.exp(-0.5 * x * x) / (T**0.25 * math.pi**0.25)
    return float(_normalized_column(m, x, start)[m])


def reconstruct(U, grid: VelocityGrid, T: float) -> np.ndarray:
    """Point values f(v_j) = sum_m u_m psi_m(v_j) of a moment vector."""
    U = np.asarray(U, dtype=float)
    table = psi_table(U.size - 1, grid.points, T)
    return U @ table


def project(f_samples, grid: VelocityGrid, m: int, T: float) -> float:
    """Moment u_m = integral f psi^m dv by trapezoid quadrature on the grid.

    Accuracy is the caller's responsibility: the grid must be wide and dense
    enough that f decays below ~1e-14 at the endpoints.
    """
    f = np.asarray(f_samples, dtype=float)
    dual = psi_dual_table(m, grid.points, T)[m]
    return float(np.trapezoid(f * dual, grid.points))
