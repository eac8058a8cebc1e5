"""Exact samplers for stable laws and stable Ornstein-Uhlenbeck paths.

Stable variates come from the Chambers-Mallows-Stuck construction in the
classical S1 parametrization and are shifted into the continuous (M) form:
for alpha != 1 the M law equals the S1 law moved by beta sigma tan(pi alpha/2),
so X = sigma Z + mu - beta sigma tan(pi alpha / 2); for alpha = 1, X = sigma Z + mu.

Stream discipline: ``RngStream(seed, stream_id, series)`` seeds a Philox
generator with ``SeedSequence(seed, spawn_key=(stream_id, series))``. The
Monte Carlo harness uses stream_id = replication index and series 0. Every
variate consumes one (V, W) row of uniforms, drawn row by row, so drawing
n1 rows then n2 rows from the same stream yields the same numbers as drawing
n1 + n2 rows at once. An OU path consumes one row for its stationary start
and one per transition; continuing a path with ``x_start`` skips the start
row, which makes chunked simulation identical to a single run.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidParameter
from .stable_model import BRIDGE_WIDTH, StableParams

_OPEN = np.finfo(float).eps


@dataclass
class RngStream:
    """Reproducible random stream identified by (seed, stream_id, series)."""

    seed: int
    stream_id: int = 0
    series: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, self.series))
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def uniform_pairs(self, n: int) -> np.ndarray:
        """n rows of (u_v, u_w) in the open unit square."""
        return np.clip(self.generator.random((n, 2)), _OPEN, 1.0 - _OPEN)


@dataclass(frozen=True)
class OUParams:
    """Stable OU parameters (alpha, sigma, lambda)."""

    alpha: float
    sigma: float
    lam: float

    def __post_init__(self) -> None:
        if not all(np.isfinite([self.alpha, self.sigma, self.lam])):
            raise InvalidParameter(f"non-finite parameter in {self}")
        if not 0 < self.alpha <= 2:
            raise InvalidParameter(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.sigma <= 0 or self.lam <= 0:
            raise InvalidParameter(f"sigma and lambda must be positive, got {self.sigma}, {self.lam}")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.sigma, self.lam], dtype=float)

    @classmethod
    def from_array(cls, values) -> "OUParams":
        alpha, sigma, lam = (float(v) for v in values)
        return cls(alpha=alpha, sigma=sigma, lam=lam)


@dataclass(frozen=True)
class OUPath:
    """Observations X_h, ..., X_nh at spacing h."""

    h: float
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        if self.h <= 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if values.size < 2:
            raise ValueError("an OU path needs at least two observations")

    @property
    def n(self) -> int:
        return int(self.values.size)


def _cms_s1(alpha: float, beta: float, uniforms: np.ndarray) -> np.ndarray:
    """Standard S1 stable variates from (V, W) uniform rows."""
    v = np.pi * (uniforms[:, 0] - 0.5)
    w = -np.log(uniforms[:, 1])
    if abs(alpha - 1.0) < BRIDGE_WIDTH:
        half = np.pi / 2.0 + beta * v
        return (2.0 / np.pi) * (half * np.tan(v) - beta * np.log((np.pi / 2.0) * w * np.cos(v) / half))
    zeta = beta * np.tan(np.pi * alpha / 2.0)
    shift = np.arctan(zeta) / alpha
    scale = (1.0 + zeta**2) ** (1.0 / (2.0 * alpha))
    return (
        scale
        * np.sin(alpha * (v + shift))
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * (v + shift)) / w) ** ((1.0 - alpha) / alpha)
    )


def _stable_from_uniforms(theta: StableParams, uniforms: np.ndarray) -> np.ndarray:
    z = _cms_s1(theta.alpha, theta.beta, uniforms)
    if abs(theta.alpha - 1.0) < BRIDGE_WIDTH:
        return theta.sigma * z + theta.mu
    return theta.sigma * z + theta.mu - theta.beta * theta.sigma * np.tan(np.pi * theta.alpha / 2.0)


def sample_stable(n: int, theta: StableParams, rng: RngStream) -> np.ndarray:
    """n i.i.d. draws whose ch.f. is the M-parametrized stable ch.f. at theta."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return _stable_from_uniforms(theta, rng.uniform_pairs(n))


def transition_scale(p: OUParams, dt: float) -> float:
    """Scale of the symmetric stable innovation over an interval dt."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    rate = p.alpha * p.lam
    return p.sigma * (-np.expm1(-rate * dt) / rate) ** (1.0 / p.alpha)


def stationary_scale(p: OUParams) -> float:
    """Scale sigma (alpha lambda)^(-1/alpha) of the stationary marginal."""
    return p.sigma * (p.alpha * p.lam) ** (-1.0 / p.alpha)


def sample_ou_path(p: OUParams, h: float, n: int, rng: RngStream, x_start: Optional[float] = None) -> OUPath:
    """Exact discretization X_(t+1)h = e^(-lambda h) X_th + eps_t.

    Without ``x_start`` the path starts from a stationary draw X_0 (not part of
    the returned values); with it, the path continues from that state.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")

    if x_start is None:
        start = StableParams(mu=0.0, sigma=stationary_scale(p), alpha=p.alpha, beta=0.0)
        x = float(_stable_from_uniforms(start, rng.uniform_pairs(1))[0])
    else:
        x = float(x_start)

    innovation = StableParams(mu=0.0, sigma=transition_scale(p, h), alpha=p.alpha, beta=0.0)
    eps = _stable_from_uniforms(innovation, rng.uniform_pairs(n))
    decay = np.exp(-p.lam * h)
    values, _ = lfilter([1.0], [1.0, -decay], eps, zi=[decay * x])
    return OUPath(h=h, values=values)
