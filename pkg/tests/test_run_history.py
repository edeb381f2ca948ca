"""Tests for the run history database"""

from __future__ import annotations

import asyncio

from fleetsim.config.settings import settings
from fleetsim.database.database import engine
from fleetsim.services.metrics import compute_metrics
from fleetsim.services.run_history import recent_runs, record_run
from fleetsim.services.sim_engine import run_scenario
from tests.helpers import single_vessel_config


def run_async(coro_fn):
    async def _wrapped():
        try:
            return await coro_fn()
        finally:
            await engine.dispose()

    return asyncio.run(_wrapped())


class TestRunHistory:
    def test_record_and_fetch(self):
        trace = run_scenario(single_vessel_config(name="history-check", horizon=0.01))
        metrics = compute_metrics(trace)

        async def scenario():
            run_id = await record_run(trace, metrics, trace_path="/tmp/history-check.csv", duration_ms=12)
            return run_id, await recent_runs(50)

        run_id, runs = run_async(scenario)
        assert run_id is not None
        stored = next(r for r in runs if r.id == run_id)
        assert stored.scenario == "history-check"
        assert stored.controller == "lc"
        assert stored.verdict == "completed"
        assert stored.duration_ms == 12
        assert stored.metrics["vessels"][0]["settle_time"] == 0.0

    def test_disabled_history(self, monkeypatch):
        monkeypatch.setattr(settings, "record_history", False)
        trace = run_scenario(single_vessel_config(horizon=0.0))
        assert run_async(lambda: record_run(trace)) is None

    def test_failures_are_swallowed(self, monkeypatch):
        async def broken():
            raise RuntimeError("database unavailable")

        monkeypatch.setattr("fleetsim.services.run_history.init_database", broken)
        trace = run_scenario(single_vessel_config(horizon=0.0))
        assert run_async(lambda: record_run(trace)) is None
