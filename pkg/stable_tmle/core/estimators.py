"""Estimators for i.i.d. stable samples.

``tml_fit`` solves the projected score equation by the method of scoring,
``explicit_gmm_fit`` solves the same first-order condition with Sigma frozen
at a preliminary estimate, and ``preliminary_estimate`` supplies the
consistent starting point both of them need.

The scoring loop itself (``fisher_scoring``) only sees a callback returning
the mean score and the approximate information at a parameter vector, so the
OU estimator in ``ou_model`` runs through the same code.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .errors import ConfigError, DegenerateSample, FactorizationFailure, InvalidParameter, NotPositiveDefinite, SingularInformation
from .logger import log_fit
from .numkit import spd_solve, sym4_inverse
from .stable_model import StableParams, skew_factor
from .trig_projection import (
    IID_GRID,
    Grid,
    TrigMoments,
    empirical_chf,
    factor_with_ridge,
    gamma_jacobian,
    gamma_vector,
    info_matrix,
    mean_trig_features,
    sigma_matrix,
    trig_moments,
)

# Points of the empirical ch.f. used by the preliminary estimator
PRELIM_POINTS = (0.2, 1.0)
PRELIM_ALPHA_RANGE = (0.15, 1.95)
PRELIM_BETA_LIMIT = 0.95
MIN_SAMPLE = 20

_MODULUS_EDGE = 1e-12

# (score, information, ridge used while building the score)
Evaluation = Tuple[np.ndarray, np.ndarray, float]


class FitStatus(Enum):
    """How a scoring iteration ended."""

    CONVERGED_SCORE = "converged_score"
    CONVERGED_STEP = "converged_step"
    MAX_ITER = "max_iter"
    STEP_FLOOR = "step_floor"

    @property
    def converged(self) -> bool:
        return self in (FitStatus.CONVERGED_SCORE, FitStatus.CONVERGED_STEP)


@dataclass(frozen=True)
class ParamBox:
    """Coordinate-wise bounds applied to every iterate."""

    names: Tuple[str, ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self) -> None:
        if not len(self.names) == len(self.lower) == len(self.upper):
            raise ConfigError("box names and bounds must have the same length")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ConfigError(f"box is empty: lower={self.lower}, upper={self.upper}")

    def clamp(self, theta: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(theta, dtype=float), self.lower, self.upper)

    def contains(self, theta: np.ndarray) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))

    def on_boundary(self, theta: np.ndarray) -> Tuple[str, ...]:
        theta = np.asarray(theta, dtype=float)
        hit = (theta <= np.asarray(self.lower)) | (theta >= np.asarray(self.upper))
        return tuple(name for name, flag in zip(self.names, hit) if flag)


STABLE_BOX = ParamBox(
    names=("mu", "sigma", "alpha", "beta"),
    lower=(-1e12, 1e-6, 0.1, -1.0),
    upper=(1e12, 1e12, 2.0, 1.0),
)


@dataclass(frozen=True)
class FitConfig:
    """Settings of the scoring iteration."""

    grid: Grid = field(default_factory=lambda: IID_GRID)
    max_iter: int = 200
    tol_step: float = 1e-8
    tol_score: float = 1e-8
    min_delta: float = 1.0 / 64.0
    box: ParamBox = field(default_factory=lambda: STABLE_BOX)

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be positive, got {self.max_iter}")
        if self.tol_step <= 0 or self.tol_score <= 0:
            raise ConfigError("tolerances must be positive")
        if not 0 < self.min_delta <= 1:
            raise ConfigError(f"min_delta must lie in (0, 1], got {self.min_delta}")


@dataclass(frozen=True)
class TraceRecord:
    """One accepted scoring iterate."""

    iteration: int
    theta: np.ndarray
    score_norm: float
    delta: float


@dataclass(frozen=True)
class ScoringOutcome:
    """Parametrization-free result of ``fisher_scoring``."""

    theta: np.ndarray
    info: np.ndarray
    info_inverse: np.ndarray
    iterations: int
    final_score_norm: float
    status: FitStatus
    trace: List[TraceRecord]
    ridge_events: int
    at_boundary: Tuple[str, ...]

    def std_errors(self, n: int) -> np.ndarray:
        return np.sqrt(np.diag(self.info_inverse) / n)


@dataclass(frozen=True)
class FitResult:
    """Estimate, approximate information and convergence diagnostics."""

    theta_hat: StableParams
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


def invert_information(info: np.ndarray) -> Tuple[np.ndarray, float]:
    """Inverse of the approximate information, ridged if it is not positive definite."""
    if not np.all(np.isfinite(info)):
        raise SingularInformation("information matrix has non-finite entries")
    try:
        return sym4_inverse(info), 0.0
    except NotPositiveDefinite:
        pass
    try:
        factor, ridge = factor_with_ridge(info, where="information")
    except FactorizationFailure as exc:
        raise SingularInformation(str(exc)) from exc
    inverse = spd_solve(factor, np.eye(factor.dim))
    return 0.5 * (inverse + inverse.T), ridge


def _max_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v)))


def fisher_scoring(
    evaluate: Callable[[np.ndarray], Evaluation],
    start: np.ndarray,
    box: ParamBox,
    max_iter: int,
    tol_score: float,
    tol_step: float,
    min_delta: float,
    label: str = "fit",
) -> ScoringOutcome:
    """theta <- clamp(theta + delta I(theta)^-1 S(theta)) with halving backtracking on delta.

    A trial point is accepted only when it lowers the max-norm of the score;
    if even ``min_delta`` does not, the iteration stops where it is with
    status STEP_FLOOR.
    """
    theta = box.clamp(start)
    score, info, ridge = evaluate(theta)
    ridge_events = int(ridge > 0)
    norm = _max_norm(score)
    trace = [TraceRecord(iteration=0, theta=theta.copy(), score_norm=norm, delta=0.0)]
    log_fit("started", estimator=label, score_norm=f"{norm:.3e}")

    status = FitStatus.MAX_ITER
    iterations = 0
    if norm <= tol_score:
        status = FitStatus.CONVERGED_SCORE
    else:
        for iteration in range(1, max_iter + 1):
            inverse, info_ridge = invert_information(info)
            ridge_events += int(info_ridge > 0)
            direction = inverse @ score

            delta = 1.0
            while True:
                trial = box.clamp(theta + delta * direction)
                try:
                    trial_score, trial_info, trial_ridge = evaluate(trial)
                except FactorizationFailure:
                    # Sigma unusable at the trial point; treat as no decrease
                    trial_norm = np.inf
                else:
                    ridge_events += int(trial_ridge > 0)
                    trial_norm = _max_norm(trial_score)
                if trial_norm < norm or delta <= min_delta:
                    break
                delta /= 2.0

            if not trial_norm < norm:
                status = FitStatus.STEP_FLOOR
                break

            step = _max_norm(trial - theta)
            theta, score, info, norm = trial, trial_score, trial_info, trial_norm
            iterations = iteration
            trace.append(TraceRecord(iteration=iteration, theta=theta.copy(), score_norm=norm, delta=delta))
            logger.debug(f"{label} iteration {iteration}: score_norm={norm:.3e} delta={delta:g} step={step:.3e}")

            if norm <= tol_score:
                status = FitStatus.CONVERGED_SCORE
                break
            if step <= tol_step:
                status = FitStatus.CONVERGED_STEP
                break

    info_inverse, final_ridge = invert_information(info)
    ridge_events += int(final_ridge > 0)
    at_boundary = box.on_boundary(theta)

    if status.converged:
        log_fit("converged", estimator=label, iterations=iterations, status=status.value)
    else:
        log_fit("not_converged", estimator=label, iterations=iterations, status=status.value, score_norm=f"{norm:.3e}")
    if at_boundary:
        log_fit("boundary", estimator=label, coordinates=",".join(at_boundary))
    if ridge_events:
        log_fit("ridged", estimator=label, ridge_events=ridge_events)

    return ScoringOutcome(
        theta=theta,
        info=info,
        info_inverse=info_inverse,
        iterations=iterations,
        final_score_norm=norm,
        status=status,
        trace=trace,
        ridge_events=ridge_events,
        at_boundary=at_boundary,
    )


def chf_inversion(phi_1: complex, phi_2: complex, u_1: float = PRELIM_POINTS[0], u_2: float = PRELIM_POINTS[1]) -> StableParams:
    """Solve the ch.f. equations at two positive points for theta.

    The modulus equations log|phi(u_j)| = -(sigma u_j)^alpha give alpha and
    sigma; the phase equations arg phi(u_j) = mu u_j - beta (sigma u_j)^alpha B
    are then linear in (mu, beta) with c_j = (sigma u_j)^alpha B.
    """
    if not 0 < u_1 < u_2:
        raise ValueError(f"need 0 < u_1 < u_2, got {u_1}, {u_2}")
    moduli = (abs(phi_1), abs(phi_2))
    for m in moduli:
        if not _MODULUS_EDGE < m < 1.0 - _MODULUS_EDGE:
            raise DegenerateSample(f"ch.f. modulus {m} is too close to 0 or 1")

    log_m1, log_m2 = np.log(moduli[0]), np.log(moduli[1])
    alpha = np.log(log_m1 / log_m2) / np.log(u_1 / u_2)
    alpha = float(np.clip(alpha, *PRELIM_ALPHA_RANGE))
    sigma = float((-log_m2) ** (1.0 / alpha) / u_2)

    u = np.array([u_1, u_2])
    a = sigma * u
    c = a**alpha * skew_factor(alpha, np.log(a))
    phase = np.angle([phi_1, phi_2])

    det = u[1] * c[0] - u[0] * c[1]
    if abs(det) < 1e-10:
        beta = 0.0
    else:
        beta = float((u[0] * phase[1] - u[1] * phase[0]) / det)
    beta = float(np.clip(beta, -PRELIM_BETA_LIMIT, PRELIM_BETA_LIMIT))
    mu = float(np.dot(u, phase + beta * c) / np.dot(u, u))
    return StableParams(mu=mu, sigma=sigma, alpha=alpha, beta=beta)


def preliminary_estimate(data: Sequence[float]) -> StableParams:
    """Consistent starting value from the empirical ch.f. of median/IQR-standardized data."""
    data = np.asarray(data, dtype=float).ravel()
    if data.size < MIN_SAMPLE:
        raise DegenerateSample(f"need at least {MIN_SAMPLE} observations, got {data.size}")
    center = float(np.median(data))
    q25, q75 = np.percentile(data, [25, 75])
    spread = float(q75 - q25)
    if not np.isfinite(spread) or spread <= 0:
        raise DegenerateSample("interquartile range is zero")

    phi = empirical_chf((data - center) / spread, PRELIM_POINTS)
    z = chf_inversion(phi[0], phi[1], *PRELIM_POINTS)
    return StableParams(mu=center + spread * z.mu, sigma=spread * z.sigma, alpha=z.alpha, beta=z.beta)


def _prepare_fit(data, cfg: Optional[FitConfig], init: Optional[StableParams]) -> Tuple[np.ndarray, FitConfig, np.ndarray]:
    cfg = cfg or FitConfig()
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise DegenerateSample("data must be non-empty")
    if init is None:
        start = cfg.box.clamp(preliminary_estimate(data).as_array())
    else:
        start = init.as_array()
        if not cfg.box.contains(start):
            raise InvalidParameter(f"initial value {init} lies outside the parameter box")
    return data, cfg, start


def _to_result(outcome: ScoringOutcome, n: int) -> FitResult:
    return FitResult(
        theta_hat=StableParams.from_array(outcome.theta),
        info=outcome.info,
        std_errors=outcome.std_errors(n),
        iterations=outcome.iterations,
        final_score_norm=outcome.final_score_norm,
        status=outcome.status,
        trace=outcome.trace,
        ridge_events=outcome.ridge_events,
        at_boundary=outcome.at_boundary,
    )


def _run(evaluate, data: np.ndarray, cfg: FitConfig, start: np.ndarray, label: str) -> FitResult:
    outcome = fisher_scoring(
        evaluate,
        start,
        cfg.box,
        max_iter=cfg.max_iter,
        tol_score=cfg.tol_score,
        tol_step=cfg.tol_step,
        min_delta=cfg.min_delta,
        label=label,
    )
    return _to_result(outcome, data.size)


def tml_fit(data: Sequence[float], cfg: Optional[FitConfig] = None, init: Optional[StableParams] = None) -> FitResult:
    """Trigonometric maximum likelihood estimate of theta."""
    data, cfg, start = _prepare_fit(data, cfg, init)
    # g averaged once; each evaluation is then O(k^3) independent of n
    g_bar = mean_trig_features(cfg.grid.points, data)

    def evaluate(theta: np.ndarray) -> Evaluation:
        tm = trig_moments(cfg.grid, StableParams.from_array(theta))
        return (g_bar - tm.gamma) @ tm.weights, info_matrix(tm), tm.ridge_used

    return _run(evaluate, data, cfg, start, label="tmle")


def explicit_gmm_fit(
    data: Sequence[float],
    cfg: Optional[FitConfig],
    weight_theta: StableParams,
    init: Optional[StableParams] = None,
) -> FitResult:
    """Explicit GMM: Sigma frozen at ``weight_theta``, gamma and gamma_theta at the running theta.

    Starts from ``weight_theta`` unless ``init`` is given.
    """
    data, cfg, start = _prepare_fit(data, cfg, init or weight_theta)
    g_bar = mean_trig_features(cfg.grid.points, data)
    weight = sigma_matrix(cfg.grid, weight_theta)
    factor, weight_ridge = factor_with_ridge(weight, where="weight matrix")

    def evaluate(theta: np.ndarray) -> Evaluation:
        params = StableParams.from_array(theta)
        tm = TrigMoments(
            gamma=gamma_vector(cfg.grid, params),
            gamma_theta=gamma_jacobian(cfg.grid, params),
            sigma=weight,
            factor=factor,
            ridge_used=weight_ridge,
        )
        return (g_bar - tm.gamma) @ tm.weights, info_matrix(tm), 0.0

    result = _run(evaluate, data, cfg, start, label="explicit-gmm")
    if weight_ridge > 0:
        return replace(result, ridge_events=result.ridge_events + 1)
    return result


def iterated_gmm_fit(
    data: Sequence[float],
    cfg: Optional[FitConfig] = None,
    rounds: int = 50,
    tol: float = 1e-10,
    init: Optional[StableParams] = None,
) -> Tuple[FitResult, List[StableParams]]:
    """Explicit GMM with the weight re-evaluated at the previous estimate.

    Stops after ``rounds`` or once successive estimates differ by at most
    ``tol`` in max-norm. Returns the last fit and the weights used, in order.
    """
    if rounds < 1:
        raise ConfigError(f"rounds must be positive, got {rounds}")
    data = np.asarray(data, dtype=float).ravel()
    weight = init or StableParams.from_array((cfg or FitConfig()).box.clamp(preliminary_estimate(data).as_array()))
    trail: List[StableParams] = []
    result = None
    for _ in range(rounds):
        trail.append(weight)
        result = explicit_gmm_fit(data, cfg, weight, init=weight)
        change = _max_norm(result.theta_hat.as_array() - weight.as_array())
        weight = result.theta_hat
        if change <= tol:
            break
    return result, trail
