"""Experiment configuration and the runner behind every command-line mode.

Monte Carlo modes fan replications out over a joblib worker pool. Replication
``i`` draws from ``RngStream(seed, stream_id=i)`` and results are ordered by
``i`` before anything is written, so the output files depend only on the
configuration, never on the number of workers.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .config import Config
from .errors import ConfigError, InvalidGrid, InvalidParameter, ReplicationFailed, StableTMLEError
from .estimators import FitConfig, FitResult, explicit_gmm_fit, preliminary_estimate, tml_fit
from .logger import log_replication
from .ou_model import OUFitConfig, OUFitResult, initial_ou_estimate, integrated_square, lambda_star_all, tcml_fit
from .reports import ReplicationReport, load_series, read_key_values, summary_table, write_csv, write_key_values
from .sampling import OUParams, OUPath, RngStream, sample_ou_path, sample_stable
from .stable_model import StableParams
from .trig_projection import IID_GRID, OU_GRID, Grid, equidistant_grid

MODES = ("sample", "fit", "sim-ou", "fit-ou", "montecarlo", "montecarlo-ou")
OU_MODES = ("sim-ou", "fit-ou", "montecarlo-ou")
ESTIMATORS = ("tmle", "explicit-gmm", "preliminary")
OU_ESTIMATORS = ("tmle", "preliminary")

STABLE_NAMES = ("mu", "sigma", "alpha", "beta")
OU_NAMES = ("alpha", "sigma", "lambda")
MONTECARLO_MODES = ("montecarlo", "montecarlo-ou")

# sampling interval for simulated paths when none is given
DEFAULT_H = 0.1


def _float_tuple(count: int) -> Callable[[str], Tuple[float, ...]]:
    def parse(text: str) -> Tuple[float, ...]:
        values = tuple(float(v) for v in text.split(","))
        if len(values) != count:
            raise ValueError(f"expected {count} comma-separated numbers, got {text!r}")
        return values

    return parse


def _grid_spec(text: str) -> Optional[Tuple[float, float, int]]:
    if text.lower() in ("", "default", "none"):
        return None
    start, step, k = text.split(",")
    return float(start), float(step), int(k)


def _names(text: str) -> Tuple[str, ...]:
    return tuple(name.strip() for name in text.split(",") if name.strip())


def _optional_text(text: str) -> Optional[str]:
    return None if text.lower() in ("", "none") else text


def _optional_float(text: str) -> Optional[float]:
    return None if text.lower() in ("", "none") else float(text)


_PARSERS: Dict[str, Callable[[str], object]] = {
    "mode": str,
    "theta0": _float_tuple(4),
    "ou": _float_tuple(3),
    "n": int,
    "h": _optional_float,
    "reps": int,
    "seed": int,
    "grid": _grid_spec,
    "estimator": _names,
    "out": str,
    "data": _optional_text,
    "trim": int,
}


def _join(values) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values)


@dataclass
class ExperimentConfig:
    """Everything one run needs; see ``from_sources`` for how it is resolved."""

    mode: str
    theta0: Tuple[float, ...] = (0.0, 1.0, 1.3, 0.0)
    ou: Tuple[float, ...] = (1.5, 1.0, 1.0)
    n: int = 1000
    h: Optional[float] = None
    reps: int = 200
    seed: int = 42
    grid: Optional[Tuple[float, float, int]] = None
    estimator: Tuple[str, ...] = ("tmle",)
    out: str = field(default_factory=lambda: Config.OUTPUT_DIR)
    data: Optional[str] = None
    trim: int = 1

    @classmethod
    def from_sources(
        cls,
        config_file: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Optional[str]]] = None,
    ) -> "ExperimentConfig":
        """Defaults, then ``key=value`` lines of ``config_file``, then ``overrides`` (None values skipped)."""
        raw: Dict[str, str] = {}
        if config_file is not None:
            raw.update(read_key_values(Path(config_file).read_text(encoding="utf-8").splitlines()))
        for key, value in (overrides or {}).items():
            if value is not None:
                raw[key] = str(value)

        unknown = sorted(set(raw) - set(_PARSERS))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        if "mode" not in raw:
            raise ConfigError("mode is required")

        parsed = {}
        for key, text in raw.items():
            try:
                parsed[key] = _PARSERS[key](text)
            except ValueError as exc:
                raise ConfigError(f"{key}={text!r}: {exc}") from exc
        config = cls(**parsed)
        config.validate()
        return config

    def validate(self) -> None:
        """Raise ConfigError listing every problem."""
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        allowed = OU_ESTIMATORS if self.mode in OU_MODES else ESTIMATORS
        if not self.estimator:
            problems.append("at least one estimator is required")
        for name in self.estimator:
            if name not in allowed:
                problems.append(f"estimator {name!r} is not available for mode {self.mode!r}")
        if len(set(self.estimator)) != len(self.estimator):
            problems.append("estimators must not repeat")
        if self.n < 2:
            problems.append(f"n must be at least 2, got {self.n}")
        if self.h is not None and self.h <= 0:
            problems.append(f"h must be positive, got {self.h}")
        if self.reps < 1:
            problems.append(f"reps must be at least 1, got {self.reps}")
        if self.mode in MONTECARLO_MODES and self.reps < 2:
            problems.append(f"mode {self.mode!r} summarizes replications and needs reps of at least 2, got {self.reps}")
        if self.mode == "montecarlo-ou" and self.trim > self.reps - 2:
            problems.append(f"trim={self.trim} leaves fewer than two lambda* values out of reps={self.reps}")
        if self.seed < 0:
            problems.append(f"seed must be non-negative, got {self.seed}")
        if self.trim < 0:
            problems.append(f"trim must be non-negative, got {self.trim}")
        if self.mode in ("fit", "fit-ou") and not self.data:
            problems.append(f"mode {self.mode!r} needs a data file")
        if self.mode == "fit-ou" and self.h is None:
            problems.append("mode 'fit-ou' needs the sampling interval h of the observed path")
        if not self.out:
            problems.append("out must not be empty")
        if self.out == "-" and self.mode in MONTECARLO_MODES:
            problems.append("Monte Carlo modes write several files and need an output directory")
        for check in (lambda: self.theta, lambda: self.ou_params, self.fit_grid):
            try:
                check()
            except (InvalidParameter, InvalidGrid) as exc:
                problems.append(str(exc))

        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def theta(self) -> StableParams:
        return StableParams.from_array(self.theta0)

    @property
    def ou_params(self) -> OUParams:
        return OUParams.from_array(self.ou)

    @property
    def interval(self) -> float:
        """Sampling interval: ``h`` when given, else ``DEFAULT_H`` for simulated paths."""
        return DEFAULT_H if self.h is None else self.h

    def fit_grid(self) -> Grid:
        if self.grid is None:
            return OU_GRID if self.mode in OU_MODES else IID_GRID
        return equidistant_grid(*self.grid)

    def echo(self) -> Dict[str, str]:
        """Resolved values in the ``key=value`` form ``from_sources`` reads back."""
        return {
            "mode": self.mode,
            "theta0": _join(self.theta0),
            "ou": _join(self.ou),
            "n": str(self.n),
            "h": "none" if self.h is None else repr(self.h),
            "reps": str(self.reps),
            "seed": str(self.seed),
            "grid": "default" if self.grid is None else _join(self.grid),
            "estimator": ",".join(self.estimator),
            "out": self.out,
            "data": self.data or "none",
            "trim": str(self.trim),
        }


@dataclass
class RunOutcome:
    """Main table of a run, its replication report (Monte Carlo modes) and the files written."""

    rows: pd.DataFrame
    report: Optional[ReplicationReport] = None
    files: List[Path] = field(default_factory=list)


@dataclass(frozen=True)
class _Failure:
    index: int
    reason: str


def _fit_columns(names: Tuple[str, ...], estimate: np.ndarray, std_errors: np.ndarray) -> Dict[str, float]:
    columns = {name: float(v) for name, v in zip(names, estimate)}
    columns.update({f"se_{name}": float(v) for name, v in zip(names, std_errors)})
    return columns


def _result_row(estimator: str, names: Tuple[str, ...], result: Union[FitResult, OUFitResult]) -> Dict[str, object]:
    return {
        "estimator": estimator,
        **_fit_columns(names, result.theta_hat.as_array(), result.std_errors),
        "iterations": result.iterations,
        "converged": result.converged,
        "status": result.status.value,
        "score_norm": result.final_score_norm,
        "ridge_events": result.ridge_events,
        "at_boundary": "|".join(result.at_boundary),
    }


def _start_row(estimator: str, names: Tuple[str, ...], estimate: np.ndarray) -> Dict[str, object]:
    return {
        "estimator": estimator,
        **_fit_columns(names, estimate, np.full(len(names), np.nan)),
        "iterations": 0,
        "converged": True,
        "status": "preliminary",
        "score_norm": np.nan,
        "ridge_events": 0,
        "at_boundary": "",
    }


def fit_stable_rows(data: np.ndarray, estimators: Tuple[str, ...], cfg: FitConfig) -> List[Dict[str, object]]:
    """One row per estimator; all share the same preliminary estimate."""
    start = StableParams.from_array(cfg.box.clamp(preliminary_estimate(data).as_array()))
    rows = []
    for name in estimators:
        if name == "preliminary":
            rows.append(_start_row(name, STABLE_NAMES, start.as_array()))
        elif name == "tmle":
            rows.append(_result_row(name, STABLE_NAMES, tml_fit(data, cfg, init=start)))
        else:
            rows.append(_result_row(name, STABLE_NAMES, explicit_gmm_fit(data, cfg, weight_theta=start)))
    return rows


def fit_ou_rows(path: OUPath, estimators: Tuple[str, ...], cfg: OUFitConfig) -> List[Dict[str, object]]:
    start = initial_ou_estimate(path, cfg.box)
    rows = []
    for name in estimators:
        if name == "preliminary":
            rows.append(_start_row(name, OU_NAMES, start.as_array()))
        else:
            rows.append(_result_row(name, OU_NAMES, tcml_fit(path, cfg, init=start)))
    return rows


def _stable_replication(config: ExperimentConfig, index: int) -> Union[List[Dict[str, object]], _Failure]:
    rng = RngStream(config.seed, stream_id=index)
    try:
        data = sample_stable(config.n, config.theta, rng)
        rows = fit_stable_rows(data, config.estimator, FitConfig(grid=config.fit_grid()))
    except StableTMLEError as exc:
        return _Failure(index, str(exc))
    log_replication(index, n=config.n)
    return [{"replication": index, "seed": config.seed, **row} for row in rows]


def _ou_replication(config: ExperimentConfig, index: int) -> Union[List[Dict[str, object]], _Failure]:
    rng = RngStream(config.seed, stream_id=index)
    try:
        path = sample_ou_path(config.ou_params, config.interval, config.n, rng)
        rows = fit_ou_rows(path, config.estimator, OUFitConfig(grid=config.fit_grid()))
    except StableTMLEError as exc:
        return _Failure(index, str(exc))
    log_replication(index, n=config.n, h=config.interval)
    w = integrated_square(path)
    return [{"replication": index, "seed": config.seed, **row, "W": w} for row in rows]


def _replicate(config: ExperimentConfig, job: Callable) -> pd.DataFrame:
    workers = Config.worker_count(config.reps)
    results = Parallel(n_jobs=workers)(delayed(job)(config, index) for index in range(config.reps))

    failures = {r.index: r.reason for r in results if isinstance(r, _Failure)}
    for index, reason in sorted(failures.items()):
        log_replication(index, success=False, reason=reason)
    if failures:
        raise ReplicationFailed(failures)

    rows = [row for batch in results for row in batch]
    frame = pd.DataFrame.from_records(rows)
    return frame.sort_values(["replication", "estimator"], kind="stable").reset_index(drop=True)


def _with_lambda_star(frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.copy()
    frame["lambda_star"] = np.nan
    for _, group in frame.groupby("estimator"):
        frame.loc[group.index, "lambda_star"] = lambda_star_all(group["lambda"].to_numpy(), group["W"].to_numpy())
    return frame


def _write_montecarlo(config: ExperimentConfig, frame: pd.DataFrame, names: Tuple[str, ...]) -> RunOutcome:
    summary = summary_table(frame, names, trim=config.trim if "lambda_star" in frame.columns else None)
    out = Path(config.out)
    files = [
        write_csv(frame, out / "rows.csv"),
        write_csv(summary, out / "summary.csv"),
        write_key_values(config.echo(), out / "config.txt"),
    ]
    return RunOutcome(rows=frame, report=ReplicationReport(rows=frame, summary=summary), files=files)


def _write_single(config: ExperimentConfig, frame: pd.DataFrame, name: str) -> RunOutcome:
    if config.out == "-":
        write_csv(frame, "-")
        return RunOutcome(rows=frame)
    out = Path(config.out)
    files = [write_csv(frame, out / name), write_key_values(config.echo(), out / "config.txt")]
    return RunOutcome(rows=frame, files=files)


def run(config: ExperimentConfig) -> RunOutcome:
    """Execute ``config.mode`` and write its files."""
    config.validate()
    if config.mode == "sample":
        data = sample_stable(config.n, config.theta, RngStream(config.seed))
        return _write_single(config, pd.DataFrame({"x": data}), "sample.csv")

    if config.mode == "sim-ou":
        path = sample_ou_path(config.ou_params, config.interval, config.n, RngStream(config.seed))
        times = config.interval * np.arange(1, path.n + 1)
        return _write_single(config, pd.DataFrame({"t": times, "x": path.values}), "path.csv")

    if config.mode == "fit":
        data = load_series(config.data)
        rows = fit_stable_rows(data, config.estimator, FitConfig(grid=config.fit_grid()))
        return _write_single(config, pd.DataFrame.from_records(rows), "fit.csv")

    if config.mode == "fit-ou":
        path = OUPath(h=config.interval, values=load_series(config.data))
        rows = fit_ou_rows(path, config.estimator, OUFitConfig(grid=config.fit_grid()))
        return _write_single(config, pd.DataFrame.from_records(rows), "fit.csv")

    if config.mode == "montecarlo":
        return _write_montecarlo(config, _replicate(config, _stable_replication), STABLE_NAMES)

    frame = _with_lambda_star(_replicate(config, _ou_replication))
    return _write_montecarlo(config, frame, OU_NAMES)
