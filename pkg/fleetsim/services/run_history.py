"""Run history persistence service"""

from __future__ import annotations

import logging
from typing import List, Optional

from sqlalchemy import select

from fleetsim.config.settings import settings
from fleetsim.database.database import async_session_maker, init_database
from fleetsim.database.models import SimulationRun
from fleetsim.services.metrics import Metrics
from fleetsim.services.sim_engine import SimTrace

logger = logging.getLogger(__name__)


async def record_run(
    trace: SimTrace,
    metrics: Optional[Metrics] = None,
    trace_path: Optional[str] = None,
    duration_ms: Optional[int] = None,
) -> Optional[int]:
    """
    Store one run in the history table

    Failures are logged and never raised, so a broken database cannot fail a run.

    Args:
        trace: Finished run
        metrics: Its summary metrics, stored as JSON
        trace_path: Where the CSV was written
        duration_ms: Wall-clock run time

    Returns:
        Row id, or None when history is disabled or the insert failed
    """
    if not settings.record_history:
        return None
    cfg = trace.config
    try:
        await init_database()
        async with async_session_maker() as session:
            entry = SimulationRun(
                scenario=cfg.name,
                controller=cfg.controller,
                seed=cfg.seed,
                dt=cfg.dt,
                horizon=cfg.horizon,
                verdict=trace.verdict,
                reason=trace.reason,
                final_time=float(trace.final_time),
                metrics=None if metrics is None else metrics.to_dict(),
                trace_path=trace_path,
                duration_ms=duration_ms,
            )
            session.add(entry)
            await session.commit()
            logger.debug("Run history entry %s recorded for %s/%s", entry.id, cfg.name, cfg.controller)
            return entry.id
    except Exception as e:
        logger.warning("Failed to record run history: %s", e)
        return None


async def recent_runs(limit: int = 20) -> List[SimulationRun]:
    """Most recent runs, newest first"""
    await init_database()
    async with async_session_maker() as session:
        result = await session.execute(
            select(SimulationRun).order_by(SimulationRun.created_at.desc(), SimulationRun.id.desc()).limit(limit)
        )
        return list(result.scalars().all())
