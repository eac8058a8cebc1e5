"""Projection of the score onto trigonometric functions.

For a grid (u_1..u_k) let g(x) = (cos u_1x..cos u_kx, sin u_1x..sin u_kx) and
gamma(theta) = E g(X). The projected score is

    S(x; theta) = gamma_theta Sigma^-1 (g(x) - gamma)

and the approximate information is I = gamma_theta Sigma^-1 gamma_thetaᵀ.
Sigma is factored once per theta; ``TrigMoments.weights`` caches
Sigma^-1 gamma_thetaᵀ so that every score evaluation is a matrix product.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import FactorizationFailure, InvalidGrid, NotPositiveDefinite
from .logger import log_ridge
from .numkit import SpdFactor, spd_factor, spd_solve
from .stable_model import StableParams, chf, chf_gradient

RIDGE_LADDER = (1e-12, 1e-10, 1e-8)


@dataclass(frozen=True)
class Grid:
    """Ordered evaluation points of the characteristic function."""

    points: np.ndarray
    tau: Optional[float] = None

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).ravel()
        object.__setattr__(self, "points", points)
        if points.size == 0:
            raise InvalidGrid("grid needs at least one point")
        if not np.all(np.isfinite(points)):
            raise InvalidGrid("grid points must be finite")
        if np.any(points == 0):
            raise InvalidGrid("grid points must be non-zero")
        if np.unique(np.abs(points)).size != points.size:
            raise InvalidGrid("grid points must have distinct absolute values")

    @property
    def k(self) -> int:
        return int(self.points.size)

    def subgrid(self, stride: int) -> "Grid":
        """Every ``stride``-th point, starting from the first."""
        tau = self.tau * stride if self.tau is not None else None
        return Grid(self.points[::stride], tau=tau)

    def scaled(self, factor: float) -> "Grid":
        """Grid with every point multiplied by ``factor``."""
        tau = abs(self.tau * factor) if self.tau is not None else None
        return Grid(self.points * factor, tau=tau)


def equidistant_grid(start: float, step: float, k: int) -> Grid:
    """Grid (start, start + step, ..., start + (k - 1) step)."""
    if k < 1:
        raise InvalidGrid(f"k must be positive, got {k}")
    if step <= 0:
        raise InvalidGrid(f"step must be positive, got {step}")
    points = start + step * np.arange(k)
    return Grid(points, tau=float(step))


IID_GRID = equidistant_grid(0.01, 0.05, 101)
OU_GRID = equidistant_grid(0.05, 0.05, 101)


@dataclass(frozen=True)
class TrigMoments:
    """gamma, gamma_theta, Sigma and its factor at one parameter value."""

    gamma: np.ndarray
    gamma_theta: np.ndarray
    sigma: np.ndarray
    factor: SpdFactor
    ridge_used: float = 0.0

    @cached_property
    def weights(self) -> np.ndarray:
        """Sigma^-1 gamma_thetaᵀ, shape (2k, p)."""
        return spd_solve(self.factor, self.gamma_theta.T)


def trig_features(points: np.ndarray, x) -> np.ndarray:
    """g(x); a row per observation, shape (n, 2k), or (2k,) for scalar x."""
    x = np.asarray(x, dtype=float)
    phase = np.multiply.outer(x, points)
    return np.concatenate([np.cos(phase), np.sin(phase)], axis=-1)


def mean_trig_features(points: np.ndarray, data, chunk: int = 65536) -> np.ndarray:
    """Mean of g over ``data`` in one chunked pass."""
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise ValueError("data must be non-empty")
    total = np.zeros(2 * points.size)
    for start in range(0, data.size, chunk):
        total += trig_features(points, data[start : start + chunk]).sum(axis=0)
    return total / data.size


def empirical_chf(data, u) -> np.ndarray:
    """Empirical characteristic function mean(exp(i u X))."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    g = mean_trig_features(u, data)
    return g[: u.size] + 1j * g[u.size :]


def trig_covariance(evaluate: Callable[[np.ndarray], np.ndarray], points: np.ndarray) -> np.ndarray:
    """Covariance of g(X) for any law whose ch.f. ``evaluate`` accepts arrays.

    Only the lower triangle is formed; the upper one is its mirror so the
    result is exactly symmetric.
    """
    k = points.size
    phi = evaluate(points)
    r, i = phi.real, phi.imag
    plus = evaluate(np.add.outer(points, points))
    minus = evaluate(np.subtract.outer(points, points))

    cc = 0.5 * (plus.real + minus.real) - np.outer(r, r)
    cs = 0.5 * (plus.imag - minus.imag) - np.outer(r, i)
    ss = 0.5 * (minus.real - plus.real) - np.outer(i, i)

    full = np.empty((2 * k, 2 * k))
    full[:k, :k] = cc
    full[k:, :k] = cs.T
    full[k:, k:] = ss
    lower = np.tril(full)
    return lower + np.tril(lower, -1).T


def factor_with_ridge(m: np.ndarray, where: str = "Sigma") -> Tuple[SpdFactor, float]:
    """Factor ``m``, escalating a diagonal ridge r·trace(m)/dim on failure."""
    try:
        return spd_factor(m), 0.0
    except NotPositiveDefinite as exc:
        failure = exc
    scale = np.trace(m) / m.shape[0]
    for r in RIDGE_LADDER:
        ridge = r * scale
        try:
            factor = spd_factor(m + ridge * np.eye(m.shape[0]))
        except NotPositiveDefinite as exc:
            failure = exc
            continue
        log_ridge(where, ridge, dim=m.shape[0])
        return factor, ridge
    raise FactorizationFailure(f"{where} is not positive definite even with the largest ridge (pivot {failure.pivot})")


def gamma_vector(grid: Grid, theta: StableParams) -> np.ndarray:
    """(phi^R(u_1)..phi^R(u_k), phi^I(u_1)..phi^I(u_k))."""
    phi = chf(grid.points, theta)
    return np.concatenate([phi.real, phi.imag])


def gamma_jacobian(grid: Grid, theta: StableParams) -> np.ndarray:
    """4 x 2k matrix; row i holds the derivatives of gamma with respect to theta_i."""
    d = chf_gradient(grid.points, theta).stacked()
    return np.concatenate([d.real, d.imag], axis=1)


def sigma_matrix(grid: Grid, theta: StableParams) -> np.ndarray:
    """Covariance of g(X) under theta."""
    return trig_covariance(lambda v: chf(v, theta), grid.points)


def moments_from_parts(gamma: np.ndarray, gamma_theta: np.ndarray, sigma: np.ndarray) -> TrigMoments:
    """Factor ``sigma`` (with the ridge ladder) and bundle the projection pieces."""
    factor, ridge = factor_with_ridge(sigma)
    return TrigMoments(gamma=gamma, gamma_theta=gamma_theta, sigma=sigma, factor=factor, ridge_used=ridge)


def trig_moments(grid: Grid, theta: StableParams) -> TrigMoments:
    return moments_from_parts(gamma_vector(grid, theta), gamma_jacobian(grid, theta), sigma_matrix(grid, theta))


def trig_score(x, tm: TrigMoments, grid: Grid) -> np.ndarray:
    """Projected score at x; shape (p,) for scalar x, (n, p) for arrays."""
    return (trig_features(grid.points, x) - tm.gamma) @ tm.weights


def empirical_score(data, tm: TrigMoments, grid: Grid) -> np.ndarray:
    """Mean projected score over ``data`` (features averaged first, then one product)."""
    return (mean_trig_features(grid.points, data) - tm.gamma) @ tm.weights


def info_matrix(tm: TrigMoments) -> np.ndarray:
    """gamma_theta Sigma^-1 gamma_thetaᵀ, symmetrized."""
    m = tm.gamma_theta @ tm.weights
    return 0.5 * (m + m.T)

