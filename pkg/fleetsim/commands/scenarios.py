"""list-scenarios command"""

from __future__ import annotations

import argparse

from fleetsim.commands.common import EXIT_OK
from fleetsim.scenarios.builtin import builtin_scenarios


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("list-scenarios", help="List the builtin scenarios")
    parser.set_defaults(func=list_scenarios)


def _describe(cfg) -> str:
    extras = []
    if cfg.disturbance.kind != "none":
        extras.append("disturbance")
    if cfg.noise.kind != "none":
        extras.append("noise")
    return ", ".join(extras) or "nominal"


def list_scenarios(args: argparse.Namespace) -> int:
    for cfg in builtin_scenarios():
        print(f"  {cfg.name:<16} {cfg.n_vessels} vessels  {_describe(cfg):<12} horizon {cfg.horizon:g} s")
    return EXIT_OK
