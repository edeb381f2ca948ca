"""compare command: one scenario under all three controllers"""

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
)
from fleetsim.scenarios.builtin import CONTROLLERS, load_config, with_controller
from fleetsim.scenarios.traces import write_trace
from fleetsim.services.metrics import compare_controllers, compute_metrics
from fleetsim.services.sim_engine import COMPLETED, run_sweep


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("compare", help="Run a scenario under BLC, LC and LSMC and compare them")
    parser.add_argument("--scenario", required=True, help="scenario1, scenario2, scenario3 or a scenario file")
    parser.add_argument("--out", help="Output directory for the traces")
    parser.add_argument("--workers", type=int, help="Process pool size")
    add_run_overrides(parser)
    parser.set_defaults(func=compare)


def compare(args: argparse.Namespace) -> int:
    base = load_config(args.scenario)
    stem = base.name.removesuffix(f"-{base.controller}")
    configs = [apply_overrides(with_controller(base, c, name=stem), args) for c in CONTROLLERS]

    print(f"✓ Comparing {', '.join(CONTROLLERS)} on {stem}")
    traces, duration_ms = timed(run_sweep, configs, args.workers)
    out = output_dir(args.out)

    entries = []
    for trace in traces:
        path = write_trace(trace, out / f"{stem}-{trace.config.controller}.csv")
        entries.append((trace, compute_metrics(trace), str(path), duration_ms // len(traces)))
    persist_runs(entries)

    print(f"  {'controller':<10} {'verdict':<10} {'total TV':>12} {'mean rms':>10} {'peak':>10} {'settle':>10}")
    for row in compare_controllers(traces):
        print(
            f"  {row.controller:<10} {row.verdict:<10} {row.total_tv:>12.1f} {row.mean_rms:>10.4f} "
            f"{row.max_peak:>10.3f} {format_optional(row.settle_time):>10}"
        )
    print(f"✓ Traces written to {out}")
    return EXIT_OK if all(t.verdict == COMPLETED for t in traces) else EXIT_DIVERGED
