"""validate command: check a scenario file without running it"""

from __future__ import annotations

import argparse

from fleetsim.commands.common import EXIT_OK
from fleetsim.dynamics.graph_topology import check_assumptions, consensus_gain_matrix
from fleetsim.scenarios.schema import read_config_file


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("validate", help="Validate a scenario file")
    parser.add_argument("--config", required=True, help="Scenario YAML file")
    parser.set_defaults(func=validate)


def validate(args: argparse.Namespace) -> int:
    cfg = read_config_file(args.config)
    topology = cfg.build_topology()
    gain = consensus_gain_matrix(topology)
    print(f"✓ {args.config} is valid: {cfg.name}, {cfg.n_vessels} vessels, controller {cfg.controller}")
    print(f"✓ L + B smallest eigenvalue {gain.min_eigenvalue:.4g}")
    for problem in check_assumptions(topology):
        print(f"❌ Warning: {problem}")
    return EXIT_OK
