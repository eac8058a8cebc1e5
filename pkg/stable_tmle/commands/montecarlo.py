"""Monte Carlo replication studies."""

import argparse

from .common import add_options, execute


def setup(subparsers: argparse._SubParsersAction) -> None:
    """Register ``montecarlo`` and ``montecarlo-ou``."""
    iid = subparsers.add_parser("montecarlo", help="replicate sampling and fitting of i.i.d. stable data")
    add_options(iid, ["theta0", "n", "reps", "seed", "grid", "estimator"])
    iid.set_defaults(handler=execute)

    ou = subparsers.add_parser("montecarlo-ou", help="replicate simulation and TCML fitting of stable OU paths")
    add_options(ou, ["ou", "h", "n", "reps", "seed", "grid", "estimator", "trim"])
    ou.set_defaults(handler=execute)
