"""Entry point for the stable-tmle command line."""

import os
import sys

# One BLAS thread per process; replications are the unit of parallelism
for _variable in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_variable, "1")

from typing import Optional, Sequence  # noqa: E402

from loguru import logger  # noqa: E402

from .cli import create_cli  # noqa: E402
from .core.config import Config  # noqa: E402
from .core.errors import StableTMLEError  # noqa: E402


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    args = create_cli().parse_args(argv)

    try:
        Config.validate()
        outcome = args.handler(args)
    except KeyboardInterrupt:
        logger.warning("🛑 Stopped by user")
        return 130
    except (StableTMLEError, OSError, RuntimeError) as e:
        logger.error(f"❌ {args.mode} failed: {e}")
        return 1

    logger.info(f"✅ {args.mode} finished [files={len(outcome.files)}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
