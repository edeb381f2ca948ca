"""Fixed-step integration of the coupled fleet ODE: plants, estimators and shunting states"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from fleetsim.config.settings import settings
from fleetsim.dynamics.control_laws import (
    ControlGains,
    ControlOutput,
    DesiredSignal,
    build_view,
    get_control_law,
    uses_shunting,
)
from fleetsim.dynamics.estimator import EstimatorGains, EstimatorState, estimation_diagnostics, estimator_rates
from fleetsim.dynamics.graph_topology import Topology, check_assumptions
from fleetsim.dynamics.neurodynamics import NeuroState, shunting_rate
from fleetsim.dynamics.vessel_model import (
    N_THETA,
    SingularityError,
    VesselState,
    kinematics_rate,
    plant_acceleration,
    theta_from_physical,
    velocity_regression,
)
from fleetsim.scenarios.schema import ScenarioConfig

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]

# Flat layout per vessel: eta, nu, v_hat, theta_hat, vartheta
VESSEL_WIDTH = 6 + 6 + 6 + N_THETA + 6
_ETA = slice(0, 6)
_NU = slice(6, 12)
_VHAT = slice(12, 18)
_THETA = slice(18, 18 + N_THETA)
_NEURO = slice(18 + N_THETA, VESSEL_WIDTH)

COMPLETED = "completed"
DIVERGED = "diverged"


@dataclass(frozen=True)
class ReferenceSpec:
    kind: str
    origin: Vector
    rate: Vector
    amplitude: Vector
    decay: float = 1.0
    omega: float = 1.0
    phase: Vector = field(default_factory=lambda: np.zeros(6))


@dataclass(frozen=True)
class DisturbanceSpec:
    """Force-level disturbance; sinusoidal follows the (sin, cos, sin, sin, cos, sin) channel pattern"""

    kind: str = "none"
    amplitudes: Vector = field(default_factory=lambda: np.array([110.0, 110.0, 110.0, 0.5, 0.5, 0.5]))
    frequency: float = 1.0
    scale: float = 1.0


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    sigma_eta: Vector = field(default_factory=lambda: np.full(6, 0.01))
    sigma_v: Vector = field(default_factory=lambda: np.full(6, 0.01))
    seed: int = 0

    @property
    def active(self) -> bool:
        return self.kind == "gaussian" and bool(np.any(self.sigma_eta > 0.0) or np.any(self.sigma_v > 0.0))


def reference_signal(t: float, ref: ReferenceSpec) -> DesiredSignal:
    """Reference pose and its first two derivatives at time t"""
    if ref.kind == "exp_ramp":
        decay = math.exp(-ref.decay * t)
        return DesiredSignal(
            eta=ref.origin + ref.rate * t + ref.amplitude * (1.0 - decay),
            eta_dot=ref.rate + ref.amplitude * ref.decay * decay,
            eta_ddot=-ref.amplitude * ref.decay**2 * decay,
        )
    if ref.kind == "sinusoid":
        arg = ref.omega * t + ref.phase
        return DesiredSignal(
            eta=ref.origin + ref.amplitude * np.sin(arg),
            eta_dot=ref.amplitude * ref.omega * np.cos(arg),
            eta_ddot=-ref.amplitude * ref.omega**2 * np.sin(arg),
        )
    raise ValueError(f"Unknown reference kind '{ref.kind}'")


def disturbance_signal(t: float, spec: DisturbanceSpec) -> Vector:
    """
    Force-level disturbance d(t)

    Args:
        t: Time [s]
        spec: Disturbance description

    Returns:
        (A1 sin wt, A2 cos wt, A3 sin wt, A4 sin wt, A5 cos wt, A6 sin wt) scaled, or zeros
    """
    if spec.kind == "none":
        return np.zeros(6)
    s, c = math.sin(spec.frequency * t), math.cos(spec.frequency * t)
    return spec.scale * spec.amplitudes * np.array([s, c, s, s, c, s])


def draw_noise(spec: NoiseSpec, rng: np.random.Generator) -> Tuple[Vector, Vector]:
    """One sample of (pose noise, velocity noise); zeros without consuming the generator when inactive"""
    if not spec.active:
        return np.zeros(6), np.zeros(6)
    return rng.normal(0.0, spec.sigma_eta), rng.normal(0.0, spec.sigma_v)


def measure(state: VesselState, spec: NoiseSpec, rng: np.random.Generator) -> VesselState:
    """Noisy measurement of a vessel state; returns the state itself when noise is off"""
    if not spec.active:
        return state
    eta_noise, v_noise = draw_noise(spec, rng)
    return VesselState(state.eta + eta_noise, state.nu + v_noise)


@dataclass(frozen=True)
class FleetState:
    """Every integrated quantity of the fleet at time t"""

    t: float
    vessels: Tuple[VesselState, ...]
    estimators: Tuple[EstimatorState, ...]
    neuro: Tuple[NeuroState, ...]

    @property
    def n_vessels(self) -> int:
        return len(self.vessels)

    def to_vector(self) -> Vector:
        x = np.empty(self.n_vessels * VESSEL_WIDTH)
        for i in range(self.n_vessels):
            row = x[i * VESSEL_WIDTH:(i + 1) * VESSEL_WIDTH]
            row[_ETA] = self.vessels[i].eta
            row[_NU] = self.vessels[i].nu
            row[_VHAT] = self.estimators[i].v_hat
            row[_THETA] = self.estimators[i].theta_hat
            row[_NEURO] = self.neuro[i].vartheta
        return x

    @classmethod
    def from_vector(cls, t: float, x: Vector, n: int) -> "FleetState":
        rows = x.reshape(n, VESSEL_WIDTH)
        return cls(
            t=t,
            vessels=tuple(VesselState(r[_ETA].copy(), r[_NU].copy()) for r in rows),
            estimators=tuple(EstimatorState(r[_VHAT].copy(), r[_THETA].copy()) for r in rows),
            neuro=tuple(NeuroState(r[_NEURO].copy()) for r in rows),
        )


@dataclass(frozen=True)
class FleetModel:
    """Scenario compiled into the arrays the integrator works on"""

    topology: Topology
    offsets: NDArray[np.float64]
    theta_true: NDArray[np.float64]
    inertia: NDArray[np.float64]
    controller: str
    control_gains: ControlGains
    estimator_gains: EstimatorGains
    reference: ReferenceSpec
    disturbance: DisturbanceSpec
    noise: NoiseSpec

    @property
    def n_vessels(self) -> int:
        return self.topology.n_vessels

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "FleetModel":
        params = [v.params.to_params() for v in cfg.vessels]
        ref = cfg.reference
        return cls(
            topology=cfg.build_topology(),
            offsets=cfg.offsets_array(),
            theta_true=np.stack([theta_from_physical(p) for p in params]),
            inertia=np.stack([p.effective_inertia() for p in params]),
            controller=cfg.controller,
            control_gains=cfg.gains.control_gains(),
            estimator_gains=cfg.gains.estimator_gains(),
            reference=ReferenceSpec(
                kind=ref.kind,
                origin=np.asarray(ref.origin, dtype=np.float64),
                rate=np.asarray(ref.rate, dtype=np.float64),
                amplitude=np.asarray(ref.amplitude, dtype=np.float64),
                decay=ref.decay,
                omega=ref.omega,
                phase=np.asarray(ref.phase, dtype=np.float64),
            ),
            disturbance=DisturbanceSpec(
                kind=cfg.disturbance.kind,
                amplitudes=np.asarray(cfg.disturbance.amplitudes, dtype=np.float64),
                frequency=cfg.disturbance.frequency,
                scale=cfg.disturbance.scale,
            ),
            noise=NoiseSpec(
                kind=cfg.noise.kind,
                sigma_eta=np.asarray(cfg.noise.sigma_eta, dtype=np.float64),
                sigma_v=np.asarray(cfg.noise.sigma_v, dtype=np.float64),
                seed=cfg.seed,
            ),
        )

    def initial_state(self, cfg: ScenarioConfig) -> FleetState:
        vessels = tuple(VesselState.from_arrays(v.eta0, v.nu0) for v in cfg.vessels)
        return FleetState(
            t=0.0,
            vessels=vessels,
            estimators=tuple(EstimatorState.initial(v.nu) for v in vessels),
            neuro=tuple(NeuroState.initial() for _ in vessels),
        )


@dataclass(frozen=True)
class ControlSample:
    """
    Everything sampled at the start of one step and held over it

    Attributes:
        outputs: Control output per vessel (tau already clamped)
        eta_noise: Held pose noise per vessel
        v_noise: Held velocity noise per vessel
    """

    outputs: Tuple[ControlOutput, ...]
    eta_noise: NDArray[np.float64]
    v_noise: NDArray[np.float64]

    @property
    def tau(self) -> NDArray[np.float64]:
        return np.stack([o.tau for o in self.outputs])

    @property
    def z(self) -> NDArray[np.float64]:
        return np.stack([o.z for o in self.outputs])


def sample_controls(fs: FleetState, model: FleetModel, rng: np.random.Generator) -> ControlSample:
    """
    Sample measurements and evaluate every vessel's control law

    Each vessel's view is built from neighbor measurements only.

    Raises:
        SingularityError: a measured pitch reached the transform guard
    """
    n = fs.n_vessels
    eta_noise = np.zeros((n, 6))
    v_noise = np.zeros((n, 6))
    for i in range(n):
        eta_noise[i], v_noise[i] = draw_noise(model.noise, rng)

    measured = [VesselState(fs.vessels[i].eta + eta_noise[i], fs.vessels[i].nu + v_noise[i]) for i in range(n)]
    etas = np.stack([m.eta for m in measured])
    eta_rates = np.stack([kinematics_rate(m) for m in measured])
    desired = reference_signal(fs.t, model.reference)
    law = get_control_law(model.controller)

    outputs = []
    for i in range(n):
        view = build_view(i, model.topology, etas, eta_rates, measured[i].nu, model.offsets, desired)
        outputs.append(law(view, fs.estimators[i], fs.neuro[i], model.control_gains))
    return ControlSample(outputs=tuple(outputs), eta_noise=eta_noise, v_noise=v_noise)


def fleet_derivative(fs: FleetState, model: FleetModel, held: ControlSample) -> Vector:
    """
    One evaluation of the coupled right-hand side with the held control sample

    Returns:
        Rate vector in the flat layout of FleetState.to_vector
    """
    d = disturbance_signal(fs.t, model.disturbance)
    shunting = model.control_gains.shunting if uses_shunting(model.controller) else None
    rate = np.zeros(fs.n_vessels * VESSEL_WIDTH)
    for i in range(fs.n_vessels):
        row = rate[i * VESSEL_WIDTH:(i + 1) * VESSEL_WIDTH]
        state = fs.vessels[i]
        tau = held.outputs[i].tau
        row[_ETA] = kinematics_rate(state)
        row[_NU] = plant_acceleration(state, tau, model.theta_true[i], d / model.inertia[i])
        v_meas = state.nu + held.v_noise[i]
        psi = velocity_regression(v_meas, tau)
        row[_VHAT], row[_THETA] = estimator_rates(fs.estimators[i], v_meas, psi, model.estimator_gains)
        if shunting is not None:
            row[_NEURO] = shunting_rate(fs.neuro[i], held.outputs[i].z, shunting)
    return rate


def rk4_step(rhs: Callable[[float, Vector], Vector], t: float, x: Vector, dt: float) -> Vector:
    """Classical fourth-order Runge-Kutta step of x_dot = rhs(t, x)"""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = rhs(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def fleet_step(fs: FleetState, model: FleetModel, held: ControlSample, dt: float) -> FleetState:
    """Advance the fleet one step with the control sample held constant"""
    n = fs.n_vessels

    def rhs(t: float, x: Vector) -> Vector:
        return fleet_derivative(FleetState.from_vector(t, x, n), model, held)

    return FleetState.from_vector(fs.t + dt, rk4_step(rhs, fs.t, fs.to_vector(), dt), n)


def trace_columns(n: int) -> List[str]:
    """CSV header: t, then per vessel eta, v, e, z, theta_act, tau, obs_err, param_err"""
    columns = ["t"]
    for i in range(1, n + 1):
        for name in ("eta", "v", "e", "z", "theta_act", "tau"):
            columns.extend(f"{name}_{i}_{k}" for k in range(1, 7))
        columns.extend([f"obs_err_{i}", f"param_err_{i}"])
    return columns


# Per-vessel column count after t
TRACE_VESSEL_WIDTH = 6 * 6 + 2


@dataclass
class SimTrace:
    """
    Recorded run

    Attributes:
        config: Scenario that produced the trace
        verdict: "completed" or "diverged"
        rows: (m, 1 + n * TRACE_VESSEL_WIDTH) array, column order of trace_columns
        final_time: Last integrated time [s]
        reason: Why the run diverged, if it did
        control_tv: Per-vessel sum of ||tau_k+1 - tau_k||_1 over every integration step
    """

    config: ScenarioConfig
    verdict: str
    rows: NDArray[np.float64]
    final_time: float
    reason: Optional[str] = None
    control_tv: Optional[NDArray[np.float64]] = None

    @property
    def n_vessels(self) -> int:
        return (self.rows.shape[1] - 1) // TRACE_VESSEL_WIDTH

    @property
    def columns(self) -> List[str]:
        return trace_columns(self.n_vessels)

    @property
    def times(self) -> NDArray[np.float64]:
        return self.rows[:, 0]

    def series(self, name: str, vessel: int) -> NDArray[np.float64]:
        """
        Columns of one recorded quantity of a vessel

        Args:
            name: eta, v, e, z, theta_act, tau, obs_err or param_err
            vessel: 0-based vessel index

        Returns:
            (m, 6) block, or (m,) for the scalar error norms
        """
        base = 1 + vessel * TRACE_VESSEL_WIDTH
        blocks = ("eta", "v", "e", "z", "theta_act", "tau")
        if name in blocks:
            start = base + 6 * blocks.index(name)
            return self.rows[:, start:start + 6]
        if name == "obs_err":
            return self.rows[:, base + 36]
        if name == "param_err":
            return self.rows[:, base + 37]
        raise KeyError(f"Unknown trace quantity '{name}'")


def _record(fs: FleetState, model: FleetModel, sample: ControlSample) -> Vector:
    row = [np.array([fs.t])]
    for i in range(fs.n_vessels):
        out = sample.outputs[i]
        obs, param = estimation_diagnostics(fs.estimators[i], fs.vessels[i].nu, model.theta_true[i])
        row.extend(
            [fs.vessels[i].eta, fs.vessels[i].nu, out.error, out.z, fs.neuro[i].vartheta, out.tau, np.array([obs, param])]
        )
    return np.concatenate(row)


def _divergence(x: Vector, threshold: float) -> Optional[str]:
    if not np.all(np.isfinite(x)):
        return "non-finite state"
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    if peak > threshold:
        return f"state magnitude {peak:.3e} exceeds {threshold:.1e}"
    return None


def run_scenario(cfg: ScenarioConfig) -> SimTrace:
    """
    Integrate a scenario from t = 0 to its horizon

    Records every record_every-th step plus the final step. Divergence or a
    transform singularity ends the run with the "diverged" verdict.

    Args:
        cfg: Validated scenario

    Returns:
        SimTrace; identical configs (seed included) give identical traces
    """
    model = FleetModel.from_config(cfg)
    check_assumptions(model.topology)
    rng = np.random.default_rng(cfg.seed)
    n_steps = int(round(cfg.horizon / cfg.dt))
    threshold = settings.divergence_threshold

    logger.info(
        "Running scenario %s with %s: %d vessels, %d steps of %.3g s",
        cfg.name, cfg.controller, model.n_vessels, n_steps, cfg.dt,
    )

    fs = model.initial_state(cfg)
    rows: List[Vector] = []
    control_tv = np.zeros(model.n_vessels)
    last_tau: Optional[NDArray[np.float64]] = None
    warned = set()
    verdict, reason = COMPLETED, None

    for k in range(n_steps + 1):
        try:
            sample = sample_controls(fs, model, rng)
        except SingularityError as e:
            verdict, reason = DIVERGED, str(e)
            break

        tau = sample.tau
        if last_tau is not None:
            control_tv += np.abs(tau - last_tau).sum(axis=1)
        last_tau = tau

        for i, out in enumerate(sample.outputs):
            if out.regularized and i not in warned:
                warned.add(i)
                logger.warning("Vessel %d: estimated input coefficient below the floor at t=%.3f, B_bar regularized", i, fs.t)

        if k % cfg.record_every == 0 or k == n_steps:
            rows.append(_record(fs, model, sample))
        if k == n_steps:
            break

        try:
            stepped = fleet_step(fs, model, sample, cfg.dt)
        except SingularityError as e:
            verdict, reason = DIVERGED, str(e)
            break
        # t = (k + 1) dt
        stepped = FleetState((k + 1) * cfg.dt, stepped.vessels, stepped.estimators, stepped.neuro)
        reason = _divergence(stepped.to_vector(), threshold)
        if reason is not None:
            verdict = DIVERGED
            fs = stepped
            break
        fs = stepped

    if verdict == DIVERGED:
        logger.warning("Scenario %s with %s diverged at t=%.3f: %s", cfg.name, cfg.controller, fs.t, reason)
    else:
        logger.info("Scenario %s with %s completed at t=%.3f", cfg.name, cfg.controller, fs.t)

    width = 1 + model.n_vessels * TRACE_VESSEL_WIDTH
    data = np.vstack(rows) if rows else np.empty((0, width))
    return SimTrace(config=cfg, verdict=verdict, rows=data, final_time=fs.t, reason=reason, control_tv=control_tv)


def run_sweep(configs: Sequence[ScenarioConfig], max_workers: Optional[int] = None) -> List[SimTrace]:
    """
    Run independent scenarios in a process pool

    Returns:
        Traces in the order of configs
    """
    if len(configs) <= 1 or max_workers == 1:
        return [run_scenario(cfg) for cfg in configs]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run_scenario, configs))
