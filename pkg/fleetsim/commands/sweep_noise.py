"""sweep-noise command: largest noise level each controller survives"""

from __future__ import annotations

import argparse

from fleetsim.commands.common import EXIT_OK, add_run_overrides, apply_overrides, format_optional
from fleetsim.scenarios.builtin import CONTROLLERS, load_config, with_controller
from fleetsim.services.metrics import noise_robustness


def _sigmas(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")
    if not values or any(v < 0.0 for v in values):
        raise argparse.ArgumentTypeError("sigmas must be non-negative")
    return values


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("sweep-noise", help="Sweep the measurement noise level for every controller")
    parser.add_argument("--scenario", default="scenario3", help="Base scenario (default: scenario3)")
    parser.add_argument("--sigmas", type=_sigmas, default=[0.01, 0.05, 0.1], help="Comma-separated noise levels")
    parser.add_argument("--workers", type=int, help="Process pool size")
    add_run_overrides(parser)
    parser.set_defaults(func=sweep_noise)


def sweep_noise(args: argparse.Namespace) -> int:
    base = load_config(args.scenario)
    stem = base.name.removesuffix(f"-{base.controller}")
    configs = [apply_overrides(with_controller(base, c, name=stem), args) for c in CONTROLLERS]

    print(f"✓ Sweeping sigma {args.sigmas} on {stem}")
    result = noise_robustness(configs, args.sigmas, max_workers=args.workers)

    header = "".join(f"{s:>12g}" for s in result.sigmas)
    print(f"  {'controller':<10}{header}  {'largest':>10}")
    for controller, verdicts in result.verdicts.items():
        cells = "".join(f"{v:>12}" for v in verdicts)
        largest = format_optional(result.largest_completing[controller], "g", missing="none")
        print(f"  {controller:<10}{cells}  {largest:>10}")
    return EXIT_OK
