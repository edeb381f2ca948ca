"""metrics command: summarize a written trace"""

from __future__ import annotations

import argparse

from fleetsim.commands.common import EXIT_OK, format_optional
from fleetsim.scenarios.traces import read_trace
from fleetsim.services.metrics import compute_metrics


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("metrics", help="Compute summary metrics of a trace")
    parser.add_argument("--trace", required=True, help="Trace CSV written by run")
    parser.add_argument("--settle-threshold", type=float, help="Error norm counted as settled")
    parser.set_defaults(func=show_metrics)


def show_metrics(args: argparse.Namespace) -> int:
    trace = read_trace(args.trace)
    m = compute_metrics(trace, args.settle_threshold)
    print(f"✓ {trace.config.name} / {trace.config.controller}: {m.verdict}, threshold {m.settle_threshold:g}")
    for i, vm in enumerate(m.vessels, start=1):
        print(
            f"  vessel {i}: settle {format_optional(vm.settle_time)}  rms {vm.rms_error:.4f}  peak {vm.peak_error:.3f}  "
            f"TV {vm.control_tv:.1f}  max|theta_act| {vm.max_abs_vartheta:.3f}  "
            f"obs_err {vm.final_obs_error:.2e}  param_err {vm.final_param_error:.3f}"
        )
    return EXIT_OK
