"""Helpers shared by the command modules"""

from __future__ import annotations

import argparse
import asyncio
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from fleetsim.config.settings import settings
from fleetsim.database.database import engine
from fleetsim.scenarios.schema import ScenarioConfig, ScenarioConfigError
from fleetsim.services.metrics import Metrics
from fleetsim.services.run_history import record_run
from fleetsim.services.sim_engine import SimTrace

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIVERGED = 2


def add_run_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dt", type=float, help="Integration step [s]")
    parser.add_argument("--horizon", type=float, help="Simulated time [s]")
    parser.add_argument("--seed", type=int, help="Noise generator seed")
    parser.add_argument("--record-every", type=int, help="Steps between trace rows")
    parser.add_argument("--noise-sigma", type=float, help="Gaussian noise std on every channel (0 disables)")
    parser.add_argument("--disturbance-scale", type=float, help="Multiplier on the disturbance amplitudes")


def apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    """Config with the CLI overrides applied, validated again"""
    data = cfg.model_dump()
    for key in ("dt", "horizon", "seed", "record_every"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    sigma = getattr(args, "noise_sigma", None)
    if sigma is not None:
        data["noise"] = {"kind": "gaussian" if sigma > 0.0 else "none", "sigma_eta": [sigma] * 6, "sigma_v": [sigma] * 6}
    scale = getattr(args, "disturbance_scale", None)
    if scale is not None:
        if data["disturbance"]["kind"] == "none":
            raise ScenarioConfigError(
                f"--disturbance-scale has no effect: scenario '{cfg.name}' has no disturbance",
                source="command line",
            )
        data["disturbance"]["scale"] = scale
    try:
        return ScenarioConfig.model_validate(data)
    except ValueError as e:
        raise ScenarioConfigError(str(e), source="command line") from e


def trace_stem(cfg: ScenarioConfig) -> str:
    """File stem <name>-<controller>, without repeating a controller suffix the name already has"""
    suffix = f"-{cfg.controller}"
    return cfg.name if cfg.name.endswith(suffix) else cfg.name + suffix


def output_dir(path: Optional[str]) -> Path:
    out = Path(path or settings.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def timed(fn, *args):
    """(result, elapsed milliseconds)"""
    start = time.perf_counter()
    result = fn(*args)
    return result, int((time.perf_counter() - start) * 1000)


def persist_runs(entries: Sequence[Tuple[SimTrace, Optional[Metrics], Optional[str], Optional[int]]]) -> List[Optional[int]]:
    """Record finished runs in the history database"""
    if not settings.record_history or not entries:
        return []

    async def _record() -> List[Optional[int]]:
        try:
            return [await record_run(*entry) for entry in entries]
        finally:
            await engine.dispose()

    return asyncio.run(_record())


def format_optional(value: Optional[float], fmt: str = ".3f", missing: str = "unsettled") -> str:
    return missing if value is None else format(value, fmt)
