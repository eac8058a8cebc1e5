"""Simulation commands: i.i.d. stable samples and stable OU paths."""

import argparse

from .common import add_options, execute


def setup(subparsers: argparse._SubParsersAction) -> None:
    """Register ``sample`` and ``sim-ou``."""
    sample = subparsers.add_parser("sample", help="draw an i.i.d. stable sample")
    add_options(sample, ["theta0", "n", "seed"])
    sample.set_defaults(handler=execute)

    sim_ou = subparsers.add_parser("sim-ou", help="simulate a stable OU path at spacing h")
    add_options(sim_ou, ["ou", "h", "n", "seed"])
    sim_ou.set_defaults(handler=execute)
