"""Summary metrics of recorded runs and controller comparisons"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from fleetsim.config.settings import settings
from fleetsim.scenarios.schema import NoiseConfig, ScenarioConfig
from fleetsim.services.sim_engine import COMPLETED, DIVERGED, SimTrace, run_sweep

logger = logging.getLogger(__name__)


class MetricsError(ValueError):
    """Raised when metrics cannot be computed from a trace"""


@dataclass(frozen=True)
class VesselMetrics:
    """
    Attributes:
        settle_time: First time after which ||e_i|| stays below the threshold; None if unsettled
        rms_error: RMS of ||e_i|| over the final quarter of the recorded span
        peak_error: Largest ||e_i||
        control_tv: Sum of ||tau_k+1 - tau_k||_1 over every integration step; traces
            without the per-step sum fall back to the recorded rows, i.e. trace resolution
        max_abs_vartheta: Largest shunting activity magnitude
        final_obs_error: Last ||v_hat - v||
        final_param_error: Last ||theta_hat - theta*||
    """

    settle_time: Optional[float]
    rms_error: float
    peak_error: float
    control_tv: float
    max_abs_vartheta: float
    final_obs_error: float
    final_param_error: float


@dataclass(frozen=True)
class Metrics:
    verdict: str
    settle_threshold: float
    vessels: List[VesselMetrics]

    def to_dict(self) -> dict:
        return asdict(self)


def _settle_time(times: np.ndarray, norms: np.ndarray, threshold: float) -> Optional[float]:
    above = np.flatnonzero(norms >= threshold)
    if above.size == 0:
        return float(times[0])
    last = int(above[-1])
    if last == len(times) - 1:
        return None
    return float(times[last + 1])


def total_variation(tau: np.ndarray) -> float:
    """Sum of l1 step-to-step changes of an (m, k) control history"""
    if len(tau) < 2:
        return 0.0
    return float(np.abs(np.diff(tau, axis=0)).sum())


def compute_metrics(trace: SimTrace, settle_threshold: float | None = None) -> Metrics:
    """
    Per-vessel summary of a trace

    Args:
        trace: Completed or diverged run
        settle_threshold: Error norm counted as settled (default: settings.settle_threshold)

    Returns:
        Metrics; a diverged run reports every vessel unsettled

    Raises:
        MetricsError: trace without rows
    """
    threshold = settings.settle_threshold if settle_threshold is None else settle_threshold
    if trace.rows.shape[0] == 0:
        raise MetricsError("trace contains no recorded rows")

    times = trace.times
    tail = times >= times[0] + 0.75 * (times[-1] - times[0])
    vessels = []
    for i in range(trace.n_vessels):
        norms = np.linalg.norm(trace.series("e", i), axis=1)
        settle = None if trace.verdict == DIVERGED else _settle_time(times, norms, threshold)
        vessels.append(
            VesselMetrics(
                settle_time=settle,
                rms_error=float(np.sqrt(np.mean(norms[tail] ** 2))),
                peak_error=float(norms.max()),
                control_tv=(
                    float(trace.control_tv[i]) if trace.control_tv is not None else total_variation(trace.series("tau", i))
                ),
                max_abs_vartheta=float(np.abs(trace.series("theta_act", i)).max()),
                final_obs_error=float(trace.series("obs_err", i)[-1]),
                final_param_error=float(trace.series("param_err", i)[-1]),
            )
        )
    return Metrics(verdict=trace.verdict, settle_threshold=threshold, vessels=vessels)


def peak_error_in_window(trace: SimTrace, t_start: float, t_end: float) -> float:
    """Largest ||e_i|| over all vessels for recorded times in [t_start, t_end]"""
    window = (trace.times >= t_start) & (trace.times <= t_end)
    if not np.any(window):
        raise MetricsError(f"trace has no rows in [{t_start}, {t_end}]")
    return max(float(np.linalg.norm(trace.series("e", i)[window], axis=1).max()) for i in range(trace.n_vessels))


@dataclass(frozen=True)
class ControllerSummary:
    """Fleet totals of one run, one row of a controller comparison"""

    scenario: str
    controller: str
    verdict: str
    control_tv: List[float]
    total_tv: float
    mean_rms: float
    max_peak: float
    settle_time: Optional[float]


def compare_controllers(traces: Sequence[SimTrace], settle_threshold: float | None = None) -> List[ControllerSummary]:
    """
    Summarize runs of the same scenario under different controllers

    settle_time is the latest vessel settle time, None if any vessel is unsettled.
    """
    rows = []
    for trace in traces:
        m = compute_metrics(trace, settle_threshold)
        settles = [v.settle_time for v in m.vessels]
        tv = [v.control_tv for v in m.vessels]
        rows.append(
            ControllerSummary(
                scenario=trace.config.name,
                controller=trace.config.controller,
                verdict=trace.verdict,
                control_tv=tv,
                total_tv=float(sum(tv)),
                mean_rms=float(np.mean([v.rms_error for v in m.vessels])),
                max_peak=float(max(v.peak_error for v in m.vessels)),
                settle_time=None if any(s is None for s in settles) else float(max(settles)),
            )
        )
    return rows


@dataclass(frozen=True)
class NoiseRobustness:
    """Verdict per (controller, sigma) and the largest sigma each controller completed"""

    sigmas: List[float]
    verdicts: Dict[str, List[str]]
    largest_completing: Dict[str, Optional[float]]


def noise_robustness(
    configs: Sequence[ScenarioConfig],
    sigmas: Sequence[float],
    max_workers: Optional[int] = None,
) -> NoiseRobustness:
    """
    Rerun each config with Gaussian noise of every sigma on all channels

    Args:
        configs: One scenario per controller
        sigmas: Standard deviations applied to pose and velocity channels
        max_workers: Process pool size

    Returns:
        NoiseRobustness table
    """
    sigmas = sorted(float(s) for s in sigmas)
    runs = [
        cfg.model_copy(update={"noise": NoiseConfig(kind="gaussian", sigma_eta=[s] * 6, sigma_v=[s] * 6)})
        for cfg in configs
        for s in sigmas
    ]
    traces = run_sweep(runs, max_workers=max_workers)

    verdicts: Dict[str, List[str]] = {}
    largest: Dict[str, Optional[float]] = {}
    for c, cfg in enumerate(configs):
        row = [t.verdict for t in traces[c * len(sigmas):(c + 1) * len(sigmas)]]
        verdicts[cfg.controller] = row
        completed = [s for s, v in zip(sigmas, row) if v == COMPLETED]
        largest[cfg.controller] = max(completed) if completed else None
        logger.info("Noise sweep %s: %s", cfg.controller, dict(zip(sigmas, row)))
    return NoiseRobustness(sigmas=list(sigmas), verdicts=verdicts, largest_completing=largest)
