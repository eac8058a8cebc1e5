"""Small dense linear-algebra helpers and a finite-difference oracle."""

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import cho_solve, lapack

from .errors import DimensionMismatch, NotPositiveDefinite

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True)
class SpdFactor:
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix."""

    lower: np.ndarray
    dim: int

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T


def spd_factor(m: np.ndarray) -> SpdFactor:
    """Factor ``m = L Lᵀ``; raise NotPositiveDefinite with the failing pivot."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    lower, info = lapack.dpotrf(m, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefinite(int(info))
    if info < 0:
        raise ValueError(f"dpotrf rejected argument {-info}")
    return SpdFactor(lower=lower, dim=m.shape[0])


def spd_solve(f: SpdFactor, rhs: ArrayLike) -> np.ndarray:
    """Solve ``m x = rhs`` by forward and back substitution through ``f``."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != f.dim:
        raise DimensionMismatch(f"rhs has leading dimension {rhs.shape[0]}, factor has {f.dim}")
    return cho_solve((f.lower, True), rhs, check_finite=False)


def sym4_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite 4x4 (or any small) matrix, kept symmetric."""
    m = np.asarray(m, dtype=float)
    f = spd_factor(m)
    inv = spd_solve(f, np.eye(f.dim))
    return 0.5 * (inv + inv.T)


def finite_diff_jacobian(
    f: Callable[[np.ndarray], np.ndarray], theta: ArrayLike, step: float = 1e-6
) -> np.ndarray:
    """Central-difference jacobian in denominator layout: row i is d f / d theta_i."""
    theta = np.asarray(theta, dtype=float)
    rows = []
    for i in range(theta.size):
        up = theta.copy()
        down = theta.copy()
        up[i] += step
        down[i] -= step
        rows.append((np.asarray(f(up)) - np.asarray(f(down))) / (2.0 * step))
    return np.array(rows)
