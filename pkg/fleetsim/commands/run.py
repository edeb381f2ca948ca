"""run command: integrate one scenario and write its trace"""

from __future__ import annotations

import argparse

from fleetsim.commands.common import (
    EXIT_DIVERGED,
    EXIT_OK,
    add_run_overrides,
    apply_overrides,
    format_optional,
    output_dir,
    persist_runs,
    timed,
    trace_stem,
)
from fleetsim.scenarios.builtin import load_config, with_controller
from fleetsim.scenarios.traces import write_trace
from fleetsim.services.metrics import compute_metrics
from fleetsim.services.sim_engine import COMPLETED, run_scenario


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("run", help="Run one scenario and write its trace")
    parser.add_argument("--scenario", required=True, help="Builtin name (e.g. scenario1-blc) or scenario file")
    parser.add_argument("--controller", choices=["blc", "lc", "lsmc"], help="Override the scenario's controller")
    parser.add_argument("--out", help="Output directory for the trace")
    add_run_overrides(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    cfg = load_config(args.scenario)
    if args.controller and args.controller != cfg.controller:
        cfg = with_controller(cfg, args.controller, name=cfg.name.removesuffix(f"-{cfg.controller}"))
    cfg = apply_overrides(cfg, args)

    print(f"✓ Scenario {cfg.name} loaded: {cfg.n_vessels} vessels, controller {cfg.controller}")
    trace, duration_ms = timed(run_scenario, cfg)
    # a run that fails on its first sample records no rows
    metrics = compute_metrics(trace) if trace.rows.shape[0] else None

    path = output_dir(args.out) / f"{trace_stem(cfg)}.csv"
    write_trace(trace, path)
    persist_runs([(trace, metrics, str(path), duration_ms)])

    if trace.verdict == COMPLETED:
        print(f"✓ Completed {trace.final_time:.3f} s in {duration_ms / 1000:.1f} s")
    else:
        print(f"❌ Diverged at t={trace.final_time:.3f} s: {trace.reason}")
    for i, vm in enumerate(metrics.vessels if metrics else [], start=1):
        print(
            f"  vessel {i}: settle {format_optional(vm.settle_time)}  rms {vm.rms_error:.4f}  "
            f"peak {vm.peak_error:.3f}  TV {vm.control_tv:.1f}"
        )
    print(f"✓ Trace written to {path}")
    return EXIT_OK if trace.verdict == COMPLETED else EXIT_DIVERGED
