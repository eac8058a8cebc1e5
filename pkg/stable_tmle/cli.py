"""Command-line parser assembly."""

import argparse

from .commands.fit import setup as setup_fit_commands
from .commands.montecarlo import setup as setup_montecarlo_commands
from .commands.sample import setup as setup_sample_commands


def create_cli() -> argparse.ArgumentParser:
    """Create the ``stable-tmle`` parser with every command family registered."""
    parser = argparse.ArgumentParser(
        prog="stable-tmle",
        description="Trigonometric maximum likelihood for stable laws and stable OU processes.",
    )
    subparsers = parser.add_subparsers(dest="mode", required=True, metavar="COMMAND")

    setup_sample_commands(subparsers)
    setup_fit_commands(subparsers)
    setup_montecarlo_commands(subparsers)

    return parser
