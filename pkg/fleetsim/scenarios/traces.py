"""Trace files: CSV rows plus a YAML sidecar with the config echo and verdict"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

import numpy as np
import yaml

from fleetsim.scenarios.schema import ScenarioConfig
from fleetsim.services.sim_engine import TRACE_VESSEL_WIDTH, SimTrace, trace_columns

logger = logging.getLogger(__name__)


class TraceError(ValueError):
    """Raised when a trace file cannot be written or read; names the path"""

    def __init__(self, message: str, path: str | Path):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


def sidecar_path(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.yaml")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace(trace: SimTrace, path: str | Path) -> Path:
    """
    Write a trace as CSV and its sidecar metadata

    Args:
        trace: Recorded run
        path: CSV file path; the sidecar goes next to it as <stem>.meta.yaml

    Returns:
        Path of the CSV file

    Raises:
        TraceError: the file or its directory cannot be written
    """
    path = Path(path)
    meta = {
        "scenario": trace.config.name,
        "controller": trace.config.controller,
        "verdict": trace.verdict,
        "reason": trace.reason,
        "final_time": float(trace.final_time),
        "seed": trace.config.seed,
        "rows": int(trace.rows.shape[0]),
        "control_tv": None if trace.control_tv is None else [float(x) for x in trace.control_tv],
        "config": trace.config.model_dump(mode="python"),
    }
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(trace.columns)
            for row in trace.rows:
                writer.writerow([_fmt(x) for x in row])
    except OSError as e:
        raise TraceError(f"cannot write trace: {e.strerror}", path) from e
    sidecar = sidecar_path(path)
    try:
        with open(sidecar, "w", encoding="utf-8") as f:
            yaml.safe_dump(meta, f, sort_keys=False, default_flow_style=None)
    except (OSError, yaml.YAMLError) as e:
        # no CSV without its metadata
        path.unlink(missing_ok=True)
        if sidecar.is_file():
            sidecar.unlink()
        logger.error("Sidecar for %s could not be written, trace removed: %s", path, e)
        raise TraceError(f"cannot write trace metadata: {e}", sidecar) from e

    logger.info("Trace written to %s (%d rows, verdict %s)", path, trace.rows.shape[0], trace.verdict)
    return path


def read_trace(path: str | Path) -> SimTrace:
    """
    Read a trace written by write_trace

    Raises:
        TraceError: missing files, malformed header or rows
    """
    path = Path(path)
    try:
        with open(sidecar_path(path), "r", encoding="utf-8") as f:
            meta = yaml.safe_load(f)
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            body = [[float(x) for x in row] for row in reader if row]
    except OSError as e:
        raise TraceError(f"cannot read trace: {e.strerror}", path) from e
    except ValueError as e:
        raise TraceError(f"malformed trace row: {e}", path) from e

    if not header or (len(header) - 1) % TRACE_VESSEL_WIDTH != 0:
        raise TraceError("unexpected CSV header", path)
    n = (len(header) - 1) // TRACE_VESSEL_WIDTH
    if header != trace_columns(n):
        raise TraceError("CSV header does not match the trace column layout", path)
    if any(len(row) != len(header) for row in body):
        raise TraceError("row width differs from header width", path)

    try:
        config = ScenarioConfig.model_validate(meta["config"])
    except (KeyError, TypeError, ValueError) as e:
        raise TraceError(f"invalid sidecar metadata: {e}", sidecar_path(path)) from e

    rows = np.array(body, dtype=np.float64).reshape(len(body), len(header))
    return SimTrace(
        config=config,
        verdict=meta.get("verdict", "completed"),
        rows=rows,
        final_time=float(meta.get("final_time", rows[-1, 0] if len(rows) else 0.0)),
        reason=meta.get("reason"),
        control_tv=None if meta.get("control_tv") is None else np.asarray(meta["control_tv"], dtype=np.float64),
    )
