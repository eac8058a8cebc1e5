"""Logging utilities using loguru for the estimation toolkit."""

import sys
from typing import Any
from loguru import logger

from .config import Config


def setup_logging(level: str = Config.LOG_LEVEL) -> None:
    """Configure loguru logging."""
    # Remove default handler
    logger.remove()

    # stderr so that commands can stream data on stdout
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>StableTMLE</cyan> | <level>{message}</level>",
        level=level,
        colorize=True,
    )


def _context(**kwargs: Any) -> str:
    parts = [f"{k}={v}" for k, v in kwargs.items() if v is not None]
    return f"[{', '.join(parts)}]" if parts else ""


def log_fit(event: str, **kwargs: Any) -> None:
    """Log estimator lifecycle events with emoji and context."""
    context = _context(**kwargs)

    if event == "started":
        logger.debug(f"🚀 Fit started {context}")
    elif event == "converged":
        logger.debug(f"🎯 Fit converged {context}")
    elif event == "not_converged":
        logger.warning(f"⏳ Fit did not converge {context}")
    elif event == "boundary":
        logger.warning(f"🧱 Estimate on parameter box boundary {context}")
    elif event == "ridged":
        logger.warning(f"🩹 Fit needed stabilizing ridges {context}")


def log_ridge(where: str, ridge: float, **kwargs: Any) -> None:
    """Log use of a stabilizing ridge; callers count and report these."""
    logger.debug(f"🩹 Ridge {ridge:.3e} added to {where} {_context(**kwargs)}")


def log_replication(index: int, success: bool = True, **kwargs: Any) -> None:
    """Log the outcome of one Monte Carlo replication."""
    context = _context(replication=index, **kwargs)
    if success:
        logger.debug(f"✅ Replication done {context}")
    else:
        logger.error(f"💥 Replication failed {context}")


def log_output(path: str, rows: int) -> None:
    """Log a written report file."""
    logger.info(f"🗄️ Wrote {path} [rows={rows}]")


# Set up logging when module is imported
setup_logging()
