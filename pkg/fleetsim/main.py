"""Command-line entry point"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from fleetsim.commands import compare, history, metrics, run, scenarios, sweep_noise, validate
from fleetsim.commands.common import EXIT_ERROR
from fleetsim.config.settings import settings
from fleetsim.scenarios.schema import ScenarioConfigError
from fleetsim.scenarios.traces import TraceError
from fleetsim.services.metrics import MetricsError

COMMANDS = (run, scenarios, metrics, validate, compare, sweep_noise, history)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Distributed consensus formation tracking simulator for 6-DOF underwater vessels",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else 0

    logging.basicConfig(
        level=logging.DEBUG if args.verbose or settings.debug else settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.func(args)
    except (ScenarioConfigError, TraceError, MetricsError) as e:
        print(f"❌ {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
