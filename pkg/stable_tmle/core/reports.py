"""Replication summaries and the CSV/config files written next to them."""

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

from .config import Config
from .errors import ConfigError
from .logger import log_output

FLOAT_FORMAT = "%.17g"
MISSING = "NA"

PathLike = Union[str, Path]


@dataclass(frozen=True)
class ColumnSummary:
    """Mean, sd (ddof 1), skewness and non-excess kurtosis of one column."""

    count: int
    mean: float
    sd: float
    skew: Optional[float]
    kurtosis: Optional[float]


def summarize(values: Sequence[float]) -> ColumnSummary:
    """Skewness m3/m2^1.5 and kurtosis m4/m2^2 use central moments with denominator r.

    A constant column has no defined skewness or kurtosis; both are None.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise ValueError(f"summary needs at least two values, got {x.size}")
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    if np.ptp(x) == 0:
        return ColumnSummary(count=x.size, mean=mean, sd=0.0, skew=None, kurtosis=None)
    return ColumnSummary(
        count=x.size,
        mean=mean,
        sd=sd,
        skew=float(stats.skew(x, bias=True)),
        kurtosis=float(stats.kurtosis(x, fisher=False, bias=True)),
    )


def trimmed_summary(values: Sequence[float], trim: int) -> ColumnSummary:
    """Summary after dropping the ``trim`` smallest values."""
    if trim < 0:
        raise ValueError(f"trim must be non-negative, got {trim}")
    x = np.sort(np.asarray(values, dtype=float).ravel())
    return summarize(x[trim:])


@dataclass
class ReplicationReport:
    """Per-replication rows and the summary table recomputed from them."""

    rows: pd.DataFrame
    summary: pd.DataFrame


def summary_table(rows: pd.DataFrame, parameters: Sequence[str], trim: Optional[int] = None) -> pd.DataFrame:
    """One summary line per (estimator, parameter).

    Rows of failed fits are included; convergence is a row flag. When the rows
    carry a ``lambda_star`` column it is summarized untrimmed and, with
    ``trim``, once more after dropping its ``trim`` smallest values.
    """
    records = []
    for estimator, group in rows.groupby("estimator", sort=True):
        columns = list(parameters)
        if "lambda_star" in group.columns:
            columns.append("lambda_star")
        for name in columns:
            records.append({"estimator": estimator, "parameter": name, **_as_record(summarize(group[name].to_numpy()))})
        if "lambda_star" in group.columns and trim:
            trimmed = trimmed_summary(group["lambda_star"].to_numpy(), trim)
            records.append({"estimator": estimator, "parameter": f"lambda_star_trim{trim}", **_as_record(trimmed)})
    return pd.DataFrame.from_records(records, columns=["estimator", "parameter", "count", "mean", "sd", "skew", "kurtosis"])


def _as_record(s: ColumnSummary) -> Dict[str, object]:
    return {"count": s.count, "mean": s.mean, "sd": s.sd, "skew": s.skew, "kurtosis": s.kurtosis}


def write_csv(frame: pd.DataFrame, path: PathLike) -> Optional[Path]:
    """CSV with a schema comment line and floats at 17 significant digits; "-" writes to stdout."""
    if str(path) == "-":
        sys.stdout.write(f"# stable-tmle schema={Config.CSV_SCHEMA_VERSION}\n")
        frame.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, na_rep=MISSING, lineterminator="\n")
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# stable-tmle schema={Config.CSV_SCHEMA_VERSION}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, na_rep=MISSING, lineterminator="\n")
    log_output(str(path), len(frame))
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", na_values=[MISSING], keep_default_na=False)


def write_key_values(values: Dict[str, object], path: PathLike) -> Path:
    """Resolved configuration as ``key=value`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={value}" for key, value in values.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log_output(str(path), len(lines))
    return path


def read_key_values(lines: Iterable[str]) -> Dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {number}: expected key=value, got {line!r}")
        values[key.strip()] = value.strip()
    return values


def load_series(path: PathLike) -> np.ndarray:
    """Numeric values from the first column of a text/CSV file.

    Comment lines are ignored and a non-numeric first row is taken as a header;
    any other non-numeric value raises ConfigError.
    """
    try:
        frame = pd.read_csv(path, header=None, comment="#", usecols=[0], dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as exc:
        raise ConfigError(f"{path} holds no numeric values") from exc
    column = frame.iloc[:, 0].str.strip()
    values = pd.to_numeric(column, errors="coerce")
    if len(values) and np.isnan(values.iloc[0]):
        column, values = column.iloc[1:], values.iloc[1:]
    bad = values.isna().to_numpy()
    if bad.any():
        position = int(np.argmax(bad))
        raise ConfigError(f"{path}: data row {position + 1} is not a number: {column.iloc[position]!r}")
    if values.empty:
        raise ConfigError(f"{path} holds no numeric values")
    return values.to_numpy(dtype=float)
