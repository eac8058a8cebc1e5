"""Options shared by the command families."""

import argparse
from typing import Dict, Optional, Sequence

from ..core.experiments import ExperimentConfig, RunOutcome, run

OPTIONS: Dict[str, Dict[str, str]] = {
    "theta0": {"metavar": "MU,SIGMA,ALPHA,BETA", "help": "stable parameters (M parametrization)"},
    "ou": {"metavar": "ALPHA,SIGMA,LAMBDA", "help": "stable OU parameters"},
    "n": {"metavar": "N", "help": "observations per sample or path"},
    "h": {"metavar": "H", "help": "sampling interval of the OU path (required by fit-ou, simulations default to 0.1)"},
    "reps": {"metavar": "R", "help": "Monte Carlo replications"},
    "seed": {"metavar": "SEED", "help": "root seed of the random streams"},
    "grid": {"metavar": "START,STEP,K", "help": "equidistant ch.f. grid (default depends on the mode)"},
    "estimator": {"metavar": "NAMES", "help": "comma-separated estimators: tmle, explicit-gmm, preliminary"},
    "data": {"metavar": "FILE", "help": "observations, one per line or in the first CSV column"},
    "trim": {"metavar": "R", "help": "smallest lambda* values dropped in the trimmed summary"},
    "out": {"metavar": "DIR", "help": "output directory ('-' streams single tables to stdout)"},
}


def add_options(parser: argparse.ArgumentParser, names: Sequence[str]) -> None:
    """Add ``--config`` and the named options; values stay strings until ExperimentConfig parses them."""
    parser.add_argument("--config", metavar="FILE", help="key=value file; flags override its values")
    for name in names:
        parser.add_argument(f"--{name}", dest=name, default=None, **OPTIONS[name])
    parser.add_argument("--out", dest="out", default=None, **OPTIONS["out"])


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict[str, Optional[str]] = {"mode": args.mode}
    for name in OPTIONS:
        overrides[name] = getattr(args, name, None)
    return ExperimentConfig.from_sources(args.config, overrides)


def execute(args: argparse.Namespace) -> RunOutcome:
    return run(config_from_args(args))
