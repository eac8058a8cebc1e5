"""Configuration management for the estimation toolkit."""

import os
from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        return -1


class Config:
    """Runtime settings read from the environment."""

    # Worker settings
    THREADS = _int_env("STABLE_TMLE_THREADS", os.cpu_count() or 1)

    # Logging settings
    LOG_LEVEL = os.getenv("STABLE_TMLE_LOG_LEVEL", "INFO").upper()

    # Output settings
    OUTPUT_DIR = os.getenv("STABLE_TMLE_OUTPUT_DIR", "results")

    # CSV schema version written in the header comment of every report
    CSV_SCHEMA_VERSION = 1

    @classmethod
    def validate(cls) -> None:
        """Validate that environment-provided settings are usable."""
        problems = []
        if cls.THREADS < 1:
            problems.append("STABLE_TMLE_THREADS must be a positive integer")
        if cls.LOG_LEVEL not in {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}:
            problems.append(f"STABLE_TMLE_LOG_LEVEL has unknown level {cls.LOG_LEVEL!r}")
        if not cls.OUTPUT_DIR:
            problems.append("STABLE_TMLE_OUTPUT_DIR must not be empty")

        if problems:
            raise RuntimeError(f"Invalid environment configuration: {'; '.join(problems)}")

    @classmethod
    def worker_count(cls, requested: int) -> int:
        """Number of workers for `requested` replications, capped by THREADS."""
        return max(1, min(requested, cls.THREADS))
