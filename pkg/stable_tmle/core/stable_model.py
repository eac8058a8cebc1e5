"""Characteristic function of the stable law in the continuous (M) parametrization.

For theta = (mu, sigma, alpha, beta), a = |sigma u|, s = sign(u), P = a**alpha::

    psi(u) = log phi(u) = -P * (1 + i beta s B(alpha, a)) + i mu u
    B(alpha, a) = tan(pi alpha / 2) * (a**(1 - alpha) - 1)

B has the removable limit (2/pi) log a at alpha = 1, which gives the alpha = 1
formula ``-|sigma u| - i (2 beta / pi) sigma u log|sigma u| + i mu u``.

With L = log a and B_L = dB/dL, B_a = dB/dalpha the partial derivatives for
general sigma are::

    psi_mu    = i u
    psi_sigma = -(P / sigma) * (alpha + i beta s (alpha B + B_L))
    psi_alpha = -P * (L + i beta s (L B + B_a))
    psi_beta  = -i s P B

At sigma = 1 these reduce to the standardized expressions
``psi_sigma = -alpha|u|^alpha + i u (alpha|u|^(alpha-1) - 1) beta tan(pi alpha/2)`` etc.

Near alpha = 1 (|alpha - 1| < BRIDGE_WIDTH) B and its derivatives come from the
expansion in e = alpha - 1::

    B = 2L/pi - (L^2/pi) e + (L^3/(3 pi) - pi L/6) e^2
        + (pi L^2/12 - L^4/(12 pi)) e^3
        + (L^5/(60 pi) - pi L^3/36 - pi^3 L/360) e^4 + O(e^5)
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import InvalidParameter

BRIDGE_WIDTH = 5e-3

Number = Union[float, np.ndarray]


@dataclass(frozen=True)
class StableParams:
    """Parameter vector theta = (mu, sigma, alpha, beta)."""

    mu: float
    sigma: float
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not all(np.isfinite([self.mu, self.sigma, self.alpha, self.beta])):
            raise InvalidParameter(f"non-finite parameter in {self}")
        if self.sigma <= 0:
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.alpha <= 2:
            raise InvalidParameter(f"alpha must lie in (0, 2], got {self.alpha}")
        if not -1 <= self.beta <= 1:
            raise InvalidParameter(f"beta must lie in [-1, 1], got {self.beta}")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.alpha, self.beta], dtype=float)

    @classmethod
    def from_array(cls, values) -> "StableParams":
        mu, sigma, alpha, beta = (float(v) for v in values)
        return cls(mu=mu, sigma=sigma, alpha=alpha, beta=beta)


@dataclass(frozen=True)
class ChfGradient:
    """phi(u; theta) and its partial derivatives with respect to (mu, sigma, alpha, beta)."""

    value: Number
    d_mu: Number
    d_sigma: Number
    d_alpha: Number
    d_beta: Number

    def stacked(self) -> np.ndarray:
        """Partials as a complex array with one row per parameter."""
        return np.array([self.d_mu, self.d_sigma, self.d_alpha, self.d_beta])


def _bridge_terms(alpha: float, log_a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """B, dB/dL and dB/dalpha for the tan(pi alpha/2)(a^(1-alpha) - 1) factor."""
    e = alpha - 1.0
    L = log_a
    pi = np.pi
    if abs(e) < BRIDGE_WIDTH:
        c0 = 2.0 * L / pi
        c1 = -(L**2) / pi
        c2 = L**3 / (3.0 * pi) - pi * L / 6.0
        c3 = pi * L**2 / 12.0 - L**4 / (12.0 * pi)
        c4 = L**5 / (60.0 * pi) - pi * L**3 / 36.0 - pi**3 * L / 360.0
        b = c0 + e * (c1 + e * (c2 + e * (c3 + e * c4)))
        d0 = 2.0 / pi
        d1 = -2.0 * L / pi
        d2 = L**2 / pi - pi / 6.0
        d3 = pi * L / 6.0 - L**3 / (3.0 * pi)
        d4 = L**4 / (12.0 * pi) - pi * L**2 / 12.0 - pi**3 / 360.0
        b_log = d0 + e * (d1 + e * (d2 + e * (d3 + e * d4)))
        b_alpha = c1 + e * (2.0 * c2 + e * (3.0 * c3 + e * 4.0 * c4))
        return b, b_log, b_alpha

    t = np.tan(pi * alpha / 2.0)
    dt = (pi / 2.0) / np.cos(pi * alpha / 2.0) ** 2
    power = np.exp(-e * L)
    em1 = np.expm1(-e * L)
    b = t * em1
    b_log = -e * t * power
    b_alpha = dt * em1 - t * L * power
    return b, b_log, b_alpha


def skew_factor(alpha: float, log_a: Number) -> Number:
    """B(alpha, a) as a function of L = log a."""
    b, _, _ = _bridge_terms(alpha, np.asarray(log_a, dtype=float))
    return b


def _prepare(u: Number, theta: StableParams):
    u = np.asarray(u, dtype=float)
    nonzero = u != 0
    a = theta.sigma * np.abs(u)
    log_a = np.log(np.where(nonzero, a, 1.0))
    return u, nonzero, log_a


def log_chf(u: Number, theta: StableParams) -> Number:
    """psi(u; theta) = log phi(u; theta)."""
    u, nonzero, log_a = _prepare(u, theta)
    s = np.sign(u)
    power = np.where(nonzero, np.exp(theta.alpha * log_a), 0.0)
    b, _, _ = _bridge_terms(theta.alpha, log_a)
    psi = -power * (1.0 + 1j * theta.beta * s * b) + 1j * theta.mu * u
    psi = np.where(nonzero, psi, 0.0 + 0.0j)
    return psi[()] if psi.ndim == 0 else psi


def chf(u: Number, theta: StableParams) -> Number:
    """phi(u; theta)."""
    return np.exp(log_chf(u, theta))


def log_chf_gradient(u: Number, theta: StableParams) -> Tuple[Number, np.ndarray]:
    """psi and its partials, shape (4,) + u.shape, rows ordered (mu, sigma, alpha, beta)."""
    u, nonzero, log_a = _prepare(u, theta)
    s = np.sign(u)
    power = np.where(nonzero, np.exp(theta.alpha * log_a), 0.0)
    b, b_log, b_alpha = _bridge_terms(theta.alpha, log_a)
    beta = theta.beta

    psi = -power * (1.0 + 1j * beta * s * b) + 1j * theta.mu * u
    psi_mu = 1j * u
    psi_sigma = -(power / theta.sigma) * (theta.alpha + 1j * beta * s * (theta.alpha * b + b_log))
    psi_alpha = -power * (log_a + 1j * beta * s * (log_a * b + b_alpha))
    psi_beta = -1j * s * power * b

    grads = np.array([psi_mu, psi_sigma, psi_alpha, psi_beta], dtype=complex)
    grads = np.where(nonzero, grads, 0.0 + 0.0j)
    psi = np.where(nonzero, psi, 0.0 + 0.0j)
    return (psi[()] if psi.ndim == 0 else psi), grads


def chf_gradient(u: Number, theta: StableParams) -> ChfGradient:
    """phi and phi_theta_i = psi_theta_i * phi for each parameter."""
    psi, grads = log_chf_gradient(u, theta)
    value = np.exp(psi)
    d = grads * value
    return ChfGradient(
        value=value,
        d_mu=d[0][()] if d[0].ndim == 0 else d[0],
        d_sigma=d[1][()] if d[1].ndim == 0 else d[1],
        d_alpha=d[2][()] if d[2].ndim == 0 else d[2],
        d_beta=d[3][()] if d[3].ndim == 0 else d[3],
    )
