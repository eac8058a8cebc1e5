"""Conditional trigonometric estimation for the stable Ornstein-Uhlenbeck process.

Given X_s = x the value X_t, t = s + dt, is symmetric stable with location
m = e^(-lambda dt) x and scale c = sigma ((1 - e^(-alpha lambda dt)) / (alpha lambda))^(1/alpha)::

    psi(u) = i u e^(-lambda dt) x - |sigma u|^alpha K,   K = E / (lambda alpha),   E = 1 - e^(-alpha lambda dt)

Parameters are always ordered (alpha, sigma, lambda). With P = |sigma u|^alpha
and L = log|sigma u| the partial derivatives are::

    psi_alpha  = P / (lambda alpha) * ((1/alpha - L) E - lambda dt e^(-alpha lambda dt))
    psi_sigma  = -alpha sigma^(alpha - 1) |u|^alpha K
    psi_lambda = -i u dt e^(-lambda dt) x + P / (lambda alpha) * (E / lambda - alpha dt e^(-alpha lambda dt))

Fast path. Writing X_t = m + Y with Y centred, g(X_t) = R(m) g(Y) for the
block rotation R(m) = [[C, -S], [S, C]], C = diag cos(u_j m), S = diag sin(u_j m).
Hence Sigma_t = R Sigma_0 Rᵀ and the conditional score is

    J_t Sigma_0^-1 (g(Y_t) - gamma_0),   J_t = (Re psi_theta * phi_0, Im psi_theta * phi_0)

where phi_0 = exp(-|c u|^alpha) and gamma_0 = (phi_0, 0). Only the lambda row of
J_t depends on the transition, and only linearly in x, so one factorization of
Sigma_0 per parameter value serves every transition. ``cond_moments`` keeps the
direct per-transition construction; both give the same score.

Default initializer: lambda from the lag-1 sign correlation rho of the path,
lambda = -log(sin(pi rho / 2)) / h, then (alpha, scale) from the preliminary
estimator applied to X_(t+1) - e^(-lambda h) X_t, with the scale mapped back
to sigma.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidParameter
from .estimators import Evaluation, FitConfig, FitStatus, ParamBox, TraceRecord, fisher_scoring, preliminary_estimate
from .sampling import OUParams, OUPath, transition_scale
from .trig_projection import OU_GRID, Grid, TrigMoments, factor_with_ridge, trig_covariance, trig_features

OU_BOX = ParamBox(
    names=("alpha", "sigma", "lambda"),
    lower=(0.3, 1e-6, 1e-4),
    upper=(2.0, 1e12, 1e3),
)

_SIGN_EDGE = 1e-12


@dataclass(frozen=True)
class OUCondMoments(TrigMoments):
    """gamma, gamma_theta (3 x 2k), Sigma and its factor for one transition."""


@dataclass(frozen=True)
class CondChfGradient:
    """Conditional ch.f. and its partials with respect to (alpha, sigma, lambda)."""

    value: np.ndarray
    d_alpha: np.ndarray
    d_sigma: np.ndarray
    d_lambda: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.array([self.d_alpha, self.d_sigma, self.d_lambda])


@dataclass(frozen=True)
class OUFitConfig(FitConfig):
    """FitConfig with the OU grid and parameter box."""

    grid: Grid = field(default_factory=lambda: OU_GRID)
    box: ParamBox = field(default_factory=lambda: OU_BOX)


@dataclass(frozen=True)
class OUFitResult:
    """TCML estimate with the same diagnostics as FitResult."""

    theta_hat: OUParams
    info: np.ndarray
    std_errors: np.ndarray
    iterations: int
    final_score_norm: float
    status: FitStatus
    trace: List[TraceRecord]
    ridge_events: int = 0
    at_boundary: Tuple[str, ...] = ()

    @property
    def converged(self) -> bool:
        return self.status.converged


def _check_dt(dt: float) -> None:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")


def _modulus_terms(u: np.ndarray, p: OUParams, dt: float):
    """P = |sigma u|^alpha, L = log|sigma u| (0 at u = 0), E, K and e^(-alpha lambda dt)."""
    nonzero = u != 0
    a = p.sigma * np.abs(u)
    log_a = np.log(np.where(nonzero, a, 1.0))
    power = np.where(nonzero, np.exp(p.alpha * log_a), 0.0)
    rate = p.alpha * p.lam
    e = -np.expm1(-rate * dt)
    return power, log_a, e, e / rate, np.exp(-rate * dt)


def cond_log_chf_gradient(u, p: OUParams, x_prev: float, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """psi and its partials, shape (3,) + u.shape, rows ordered (alpha, sigma, lambda)."""
    _check_dt(dt)
    u = np.asarray(u, dtype=float)
    power, log_a, e, k, tail = _modulus_terms(u, p, dt)
    decay = np.exp(-p.lam * dt)
    rate = p.lam * p.alpha

    psi = 1j * u * decay * x_prev - power * k
    psi_alpha = power / rate * ((1.0 / p.alpha - log_a) * e - p.lam * dt * tail)
    psi_sigma = -(p.alpha * power / p.sigma) * k
    psi_lambda = -1j * u * dt * decay * x_prev + power / rate * (e / p.lam - p.alpha * dt * tail)
    return psi, np.array([psi_alpha, psi_sigma, psi_lambda], dtype=complex)


def cond_chf(u, p: OUParams, x_prev: float, dt: float):
    """phi(u | X_s = x_prev) for a transition of length dt."""
    _check_dt(dt)
    u = np.asarray(u, dtype=float)
    power, _, _, k, _ = _modulus_terms(u, p, dt)
    value = np.exp(1j * u * np.exp(-p.lam * dt) * x_prev - power * k)
    return value[()] if value.ndim == 0 else value


def cond_chf_gradient(u, p: OUParams, x_prev: float, dt: float) -> CondChfGradient:
    psi, grads = cond_log_chf_gradient(u, p, x_prev, dt)
    value = np.exp(psi)
    d = grads * value
    return CondChfGradient(value=value, d_alpha=d[0], d_sigma=d[1], d_lambda=d[2])


def cond_moments(grid: Grid, p: OUParams, x_prev: float, dt: float) -> OUCondMoments:
    """Projection pieces of one transition, built directly from the conditional ch.f."""
    g = cond_chf_gradient(grid.points, p, x_prev, dt)
    d = g.stacked()
    sigma = trig_covariance(lambda v: cond_chf(v, p, x_prev, dt), grid.points)
    factor, ridge = factor_with_ridge(sigma, where="conditional Sigma")
    return OUCondMoments(
        gamma=np.concatenate([g.value.real, g.value.imag]),
        gamma_theta=np.concatenate([d.real, d.imag], axis=1),
        sigma=sigma,
        factor=factor,
        ridge_used=ridge,
    )


@dataclass(frozen=True)
class _CentredParts:
    """Transition-independent pieces of the rotated score."""

    fixed: np.ndarray  # 3 x 2k rows of J_t with x = 0
    slope: np.ndarray  # 2k row multiplying x_t in the lambda row
    weights_fixed: np.ndarray
    weights_slope: np.ndarray
    gamma0: np.ndarray
    decay: float
    ridge: float


def _centred_parts(grid: Grid, p: OUParams, dt: float) -> _CentredParts:
    u = grid.points
    k = grid.k
    _, grads = cond_log_chf_gradient(u, p, 0.0, dt)
    phi0 = cond_chf(u, p, 0.0, dt).real
    decay = np.exp(-p.lam * dt)

    fixed = np.concatenate([grads.real * phi0, np.zeros((3, k))], axis=1)
    slope = np.concatenate([np.zeros(k), -u * dt * decay * phi0])

    sigma0 = trig_covariance(lambda v: cond_chf(v, p, 0.0, dt), u)
    factor, ridge = factor_with_ridge(sigma0, where="centred Sigma")
    tm = TrigMoments(gamma=np.concatenate([phi0, np.zeros(k)]), gamma_theta=np.vstack([fixed, slope]), sigma=sigma0, factor=factor)
    weights = tm.weights
    return _CentredParts(
        fixed=fixed,
        slope=slope,
        weights_fixed=weights[:, :3],
        weights_slope=weights[:, 3],
        gamma0=tm.gamma,
        decay=decay,
        ridge=ridge,
    )


def transition_scores(path: OUPath, grid: Grid, p: OUParams) -> np.ndarray:
    """Conditional score of every transition, shape (n - 1, 3)."""
    parts = _centred_parts(grid, p, path.h)
    x_prev, x_next = path.values[:-1], path.values[1:]
    centred = trig_features(grid.points, x_next - parts.decay * x_prev) - parts.gamma0
    scores = centred @ parts.weights_fixed
    scores[:, 2] += x_prev * (centred @ parts.weights_slope)
    return scores


def conditional_score(path: OUPath, grid: Grid, p: OUParams) -> Evaluation:
    """Mean conditional score, approximate information and the ridge used for Sigma_0."""
    parts = _centred_parts(grid, p, path.h)
    x_prev, x_next = path.values[:-1], path.values[1:]
    centred = trig_features(grid.points, x_next - parts.decay * x_prev) - parts.gamma0

    score = centred.mean(axis=0) @ parts.weights_fixed
    score[2] += (x_prev @ centred / x_prev.size) @ parts.weights_slope

    # mean over t of (A + x_t B) Sigma_0^-1 (A + x_t B)ᵀ with B nonzero in the lambda row only
    info = parts.fixed @ parts.weights_fixed
    cross = parts.fixed @ parts.weights_slope
    x_mean = x_prev.mean()
    info[:, 2] += x_mean * cross
    info[2, :] += x_mean * cross
    info[2, 2] += np.mean(x_prev**2) * (parts.slope @ parts.weights_slope)
    return score, 0.5 * (info + info.T), parts.ridge


def _sign_correlation(values: np.ndarray) -> float:
    return float(np.mean(np.sign(values[1:]) * np.sign(values[:-1])))


def initial_ou_estimate(path: OUPath, box: ParamBox = OU_BOX) -> OUParams:
    """Consistent-in-practice starting value for ``tcml_fit`` (see module notes)."""
    rho = _sign_correlation(path.values)
    decay = float(np.clip(np.sin(np.pi * rho / 2.0), _SIGN_EDGE, 1.0 - _SIGN_EDGE))
    lam = float(np.clip(-np.log(decay) / path.h, box.lower[2], box.upper[2]))

    innovations = path.values[1:] - np.exp(-lam * path.h) * path.values[:-1]
    start = preliminary_estimate(innovations)
    alpha = float(np.clip(start.alpha, box.lower[0], box.upper[0]))
    unit = transition_scale(OUParams(alpha=alpha, sigma=1.0, lam=lam), path.h)
    sigma = float(np.clip(start.sigma / unit, box.lower[1], box.upper[1]))
    return OUParams(alpha=alpha, sigma=sigma, lam=lam)


def tcml_fit(path: OUPath, cfg: Optional[OUFitConfig] = None, init: Optional[OUParams] = None) -> OUFitResult:
    """Trigonometric conditional maximum likelihood estimate of (alpha, sigma, lambda)."""
    cfg = cfg or OUFitConfig()
    if init is None:
        start = initial_ou_estimate(path, cfg.box).as_array()
    else:
        start = init.as_array()
        if not cfg.box.contains(start):
            raise InvalidParameter(f"initial value {init} lies outside the parameter box")

    def evaluate(theta: np.ndarray) -> Evaluation:
        return conditional_score(path, cfg.grid, OUParams.from_array(theta))

    outcome = fisher_scoring(
        evaluate,
        start,
        cfg.box,
        max_iter=cfg.max_iter,
        tol_score=cfg.tol_score,
        tol_step=cfg.tol_step,
        min_delta=cfg.min_delta,
        label="tcml",
    )
    return OUFitResult(
        theta_hat=OUParams.from_array(outcome.theta),
        info=outcome.info,
        std_errors=outcome.std_errors(path.n - 1),
        iterations=outcome.iterations,
        final_score_norm=outcome.final_score_norm,
        status=outcome.status,
        trace=outcome.trace,
        ridge_events=outcome.ridge_events,
        at_boundary=outcome.at_boundary,
    )


def integrated_square(path: OUPath) -> float:
    """Left Riemann sum h * sum X^2 approximating the integral of X^2 over the path."""
    return float(path.h * np.sum(path.values**2))


def lambda_star_all(lambda_hats: Sequence[float], paths_w: Sequence[float]) -> np.ndarray:
    """sqrt(W_i) (lambda_hat_i - mean lambda_hat) for every replication."""
    lambda_hats = np.asarray(lambda_hats, dtype=float)
    paths_w = np.asarray(paths_w, dtype=float)
    if lambda_hats.size < 2:
        raise ValueError("lambda* needs at least two replications")
    if lambda_hats.shape != paths_w.shape:
        raise ValueError(f"got {lambda_hats.size} estimates but {paths_w.size} integrated squares")
    return np.sqrt(paths_w) * (lambda_hats - lambda_hats.mean())


def lambda_star(lambda_hats: Sequence[float], paths_w: Sequence[float], index: int) -> float:
    return float(lambda_star_all(lambda_hats, paths_w)[index])
