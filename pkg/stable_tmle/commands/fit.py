"""Estimation commands for a single data set."""

import argparse

from .common import add_options, execute


def setup(subparsers: argparse._SubParsersAction) -> None:
    """Register ``fit`` and ``fit-ou``."""
    fit = subparsers.add_parser("fit", help="fit stable parameters to i.i.d. data")
    add_options(fit, ["data", "grid", "estimator"])
    fit.set_defaults(handler=execute)

    fit_ou = subparsers.add_parser("fit-ou", help="fit a stable OU process to an observed path")
    add_options(fit_ou, ["data", "h", "grid", "estimator"])
    fit_ou.set_defaults(handler=execute)
