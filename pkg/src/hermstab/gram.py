"""Gram matrix of the asymmetric Hermite family in the plain L^2 product.

The entries a_mn = integral psi_m psi_n dv admit a closed form: zero when
m + n is odd, otherwise

    a_mn = (-1)^{(m-n)/2} T^{-1/2} 2^{-(m+n)-1/2} (m+n)! / (((m+n)/2)! sqrt(m! n!)).

Large factorial ratios make the closed form unusable directly, so the
production path is a recurrence whose factors all have magnitude <= 1:
down the diagonal and then outward along anti-diagonals.  The truncated
matrix A^N is symmetric, checkerboard-sparse and positive definite, with a
condition number that grows rapidly with N (it passes 1/eps between
N = 32 and N = 40 in double precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import psi_table, quadrature_grid

__all__ = [
    "GramMatrix",
    "gram_entry_closed",
    "gram_matrix_stable",
    "gram_entry_oracle",
    "gram_asymptotic_check",
    "gram_matrix_mp",
]


@dataclass(frozen=True)
class GramMatrix:
    """Truncated Gram matrix A^N with its build parameters.

    entries[m, n] = a_mn for 0 <= m, n <= N; immutable after construction.
    """

    n_moments: int
    temperature: float
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.n_moments, self.n_moments):
            raise ValueError(f"entries shape {e.shape} does not match n_moments {self.n_moments}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def max_degree(self) -> int:
        return self.n_moments - 1


def gram_entry_closed(m: int, n: int, T: float) -> float:
    """Closed-form a_mn; log-space factorial ratios, sign tracked separately."""
    if m < 0 or n < 0:
        raise ValueError("indices must be nonnegative")
    if (m + n) % 2 == 1:
        return 0.0
    s = m + n
    sign = -1.0 if (abs(m - n) // 2) % 2 else 1.0
    log_mag = (
        -0.5 * math.log(T)
        - (s + 0.5) * math.log(2.0)
        + math.lgamma(s + 1)
        - math.lgamma(s // 2 + 1)
        - 0.5 * (math.lgamma(m + 1) + math.lgamma(n + 1))
    )
    return sign * math.exp(log_mag)


def gram_matrix_stable(N: int, T: float) -> GramMatrix:
    """Build A^N with the stable recurrences.

    Diagonal: a_00 = (2T)^{-1/2}, a_{m+1,m+1} = (2m+1)/(2m+2) a_mm.
    Off the diagonal, walking outward along anti-diagonals:

        a_{m-l-1, m+l+1} = -sqrt((m-l)/(m+l+1)) a_{m-l, m+l}.

    The outward step carries a minus sign: the closed form alternates as
    (-1)^l along each anti-diagonal, as does the descent relation
    sqrt(m) a_mn = -sqrt(n+1) a_{m-1,n+1}.  Odd-parity entries are
    constructed as exact zeros.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    if T <= 0.0:
        raise ValueError("T must be positive")
    A = np.zeros((N + 1, N + 1))
    A[0, 0] = 1.0 / math.sqrt(2.0 * T)
    for m in range(N):
        A[m + 1, m + 1] = (2 * m + 1) / (2 * m + 2) * A[m, m]
    for m in range(1, N + 1):
        for l in range(m):
            i, j = m - l - 1, m + l + 1
            if j > N:
                break
            A[i, j] = -math.sqrt((m - l) / (m + l + 1)) * A[i + 1, j - 1]
            A[j, i] = A[i, j]
    return GramMatrix(n_moments=N + 1, temperature=T, entries=A)


def gram_entry_oracle(m: int, n: int, T: float) -> float:
    """Quadrature value of integral psi_m psi_n dv, for validation."""
    grid = quadrature_grid(T)
    table = psi_table(max(m, n), grid.points, T)
    return float(np.trapezoid(table[m] * table[n], grid.points))


def gram_asymptotic_check(m: int, T: float) -> float:
    """Normalized diagonal a_mm * sqrt(2 pi T m); tends to 1 as m grows.

    Runs the diagonal recurrence, so it is cheap up to very large m.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    a = 1.0 / math.sqrt(2.0 * T)
    for k in range(m):
        a *= (2 * k + 1) / (2 * k + 2)
    return a * math.sqrt(2.0 * math.pi * T * m)


def gram_matrix_mp(N: int, T, mp):
    """A^N as an mpmath matrix, same recurrences at working precision.

    Used where double precision is structurally insufficient (the linear
    solve behind the stabilization vector, positive-definiteness checks at
    large N).  `mp` is the mpmath context to build in.
    """
    A = mp.zeros(N + 1, N + 1)
    A[0, 0] = 1 / mp.sqrt(2 * mp.mpf(T))
    for m in range(N):
        A[m + 1, m + 1] = A[m, m] * mp.mpf(2 * m + 1) / (2 * m + 2)
    for m in range(1, N + 1):
        for l in range(m):
            i, j = m - l - 1, m + l + 1
            if j > N:
                break
            A[i, j] = -mp.sqrt(mp.mpf(m - l) / (m + l + 1)) * A[i + 1, j - 1]
            A[j, i] = A[i, j]
    return A
