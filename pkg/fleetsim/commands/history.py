"""history command: recent runs from the run history database"""

from __future__ import annotations

import argparse
import asyncio

from sqlalchemy.exc import SQLAlchemyError

from fleetsim.commands.common import EXIT_ERROR, EXIT_OK
from fleetsim.database.database import engine
from fleetsim.services.run_history import recent_runs


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("history", help="Show recently recorded runs")
    parser.add_argument("--limit", type=int, default=20, help="Number of runs to show")
    parser.set_defaults(func=history)


async def _load(limit: int):
    try:
        return await recent_runs(limit)
    finally:
        await engine.dispose()


def history(args: argparse.Namespace) -> int:
    try:
        runs = asyncio.run(_load(args.limit))
    except (SQLAlchemyError, OSError) as e:
        print(f"❌ Cannot read run history: {e}")
        return EXIT_ERROR
    if not runs:
        print("No runs recorded yet")
        return EXIT_OK
    for r in runs:
        mark = "✓" if r.verdict == "completed" else "❌"
        print(
            f"{mark} #{r.id} {r.created_at:%Y-%m-%d %H:%M:%S}  {r.scenario:<18} {r.controller:<5} "
            f"seed {r.seed:<6} t={r.final_time:.2f}/{r.horizon:g} s  {r.duration_ms or 0} ms  {r.trace_path or '-'}"
        )
    return EXIT_OK
