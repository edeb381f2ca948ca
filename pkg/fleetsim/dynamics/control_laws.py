"""Distributed consensus formation control: backstepping virtual control and the BLC, LC and LSMC torque laws"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from fleetsim.config.settings import settings
from fleetsim.dynamics.estimator import EstimatorState
from fleetsim.dynamics.graph_topology import Topology
from fleetsim.dynamics.neurodynamics import NeuroState, ShuntingParams
from fleetsim.dynamics.vessel_model import (
    DAMPING_COLUMNS,
    INPUT_COLUMNS,
    VesselState,
    inverse_transform_jacobian,
    transform_jacobian_rate,
)


Vector = NDArray[np.float64]


@dataclass(frozen=True)
class NeighborInfo:
    """What vessel i receives from neighbor j: pose, pose rate and the formation offset Delta_ij"""

    index: int
    eta: Vector
    eta_rate: Vector
    offset: Vector
    weight: float


@dataclass(frozen=True)
class DesiredSignal:
    """Reference pose and its first two time derivatives"""

    eta: Vector
    eta_dot: Vector
    eta_ddot: Vector


@dataclass(frozen=True)
class NeighborhoodView:
    """
    Everything the controller of one vessel may read

    Only vessels j with a_ij > 0 appear in neighbors, so a control law
    built on a view cannot depend on any other vessel.
    """

    self_state: VesselState
    self_state_rate: Vector
    neighbors: Tuple[NeighborInfo, ...]
    b_weight: float
    desired: DesiredSignal

    def __post_init__(self) -> None:
        for nb in self.neighbors:
            if nb.weight <= 0.0:
                raise ValueError(f"Neighbor {nb.index} has non-positive weight {nb.weight}")
            if np.any(nb.offset[3:] != 0.0):
                raise ValueError(f"Formation offset to neighbor {nb.index} must have zero attitude components")


@dataclass(frozen=True)
class ControlGains:
    """
    Controller gains of one vessel

    Attributes:
        K1: Virtual-control gain diagonal
        K2: Torque gain diagonal
        shunting: Shunting constants (BLC only)
        sat_layer: Boundary-layer width of the LSMC saturation
        tau_limit: Optional per-channel command clamp, applied to every law's output
        b_floor: Smallest input coefficient B_bar may use; smaller or negative estimates are raised to it
    """

    K1: Vector
    K2: Vector
    shunting: Optional[ShuntingParams] = None
    sat_layer: float = 1.0
    tau_limit: Optional[Vector] = None
    b_floor: float = field(default_factory=lambda: settings.b_bar_floor)

    def __post_init__(self) -> None:
        if np.any(self.K1 <= 0.0) or np.any(self.K2 <= 0.0):
            raise ValueError("K1 and K2 diagonals must be strictly positive")
        if self.sat_layer <= 0.0:
            raise ValueError(f"sat_layer must be positive, got {self.sat_layer}")
        if self.tau_limit is not None and np.any(self.tau_limit <= 0.0):
            raise ValueError("tau_limit entries must be positive")
        if self.b_floor <= 0.0:
            raise ValueError(f"b_floor must be positive, got {self.b_floor}")


@dataclass(frozen=True)
class ModelMatrices:
    """Estimate-based model matrices of the z-dynamics"""

    B_bar: NDArray[np.float64]
    C_bar: NDArray[np.float64]
    D_bar: NDArray[np.float64]
    G_bar: Vector
    regularized: bool


@dataclass(frozen=True)
class ControlOutput:
    """Command of one vessel plus the signals recorded alongside it"""

    tau: Vector
    error: Vector
    z: Vector
    v_d: Vector
    regularized: bool


def build_view(
    i: int,
    topology: Topology,
    etas: NDArray[np.float64],
    eta_rates: NDArray[np.float64],
    nu_i: Vector,
    offsets: NDArray[np.float64],
    desired: DesiredSignal,
) -> NeighborhoodView:
    """
    Assemble the neighborhood view of vessel i from fleet-wide measurement arrays

    Args:
        i: Vessel index
        topology: Communication graph
        etas: (n, 6) measured poses
        eta_rates: (n, 6) pose rates J(eta_j) v_j from measurements
        nu_i: Measured body velocity of vessel i
        offsets: (n, n, 6) formation offsets Delta_ij
        desired: Reference signal

    Returns:
        NeighborhoodView reading rows of neighbors of i only
    """
    neighbors = tuple(
        NeighborInfo(
            index=j,
            eta=etas[j],
            eta_rate=eta_rates[j],
            offset=offsets[i, j],
            weight=float(topology.adjacency[i, j]),
        )
        for j in topology.neighbors(i)
    )
    return NeighborhoodView(
        self_state=VesselState(etas[i], nu_i),
        self_state_rate=eta_rates[i],
        neighbors=neighbors,
        b_weight=float(topology.reference_access[i]),
        desired=desired,
    )


def consensus_error(view: NeighborhoodView) -> Vector:
    """e_i = sum_j a_ij (eta_i - eta_j - Delta_ij) + b_i (eta_i - eta_i^d)"""
    eta_i = view.self_state.eta
    e = view.b_weight * (eta_i - view.desired.eta)
    for nb in view.neighbors:
        e = e + nb.weight * (eta_i - nb.eta - nb.offset)
    return e


def consensus_error_rate(view: NeighborhoodView) -> Vector:
    """e_i_dot = sum_j a_ij (eta_i_dot - eta_j_dot) + b_i (eta_i_dot - eta_i^d_dot)"""
    rate_i = view.self_state_rate
    e_dot = view.b_weight * (rate_i - view.desired.eta_dot)
    for nb in view.neighbors:
        e_dot = e_dot + nb.weight * (rate_i - nb.eta_rate)
    return e_dot


def virtual_velocity(view: NeighborhoodView, K1: Vector) -> Vector:
    """v^d = J^-1 (-K1 e + eta^d_dot)"""
    J_inv = inverse_transform_jacobian(view.self_state.eta[3:])
    return J_inv @ (-K1 * consensus_error(view) + view.desired.eta_dot)


def virtual_velocity_rate(view: NeighborhoodView, K1: Vector) -> Vector:
    """
    Analytic time derivative of the virtual velocity

    d/dt[J^-1 w] = -J^-1 J_dot J^-1 w + J^-1 w_dot with w = -K1 e + eta^d_dot.
    """
    eta2 = view.self_state.eta[3:]
    J_inv = inverse_transform_jacobian(eta2)
    J_dot = transform_jacobian_rate(eta2, view.self_state_rate[3:])
    w = -K1 * consensus_error(view) + view.desired.eta_dot
    w_dot = -K1 * consensus_error_rate(view) + view.desired.eta_ddot
    return -J_inv @ (J_dot @ (J_inv @ w)) + J_inv @ w_dot


def auxiliary_z(v: Vector, v_d: Vector) -> Vector:
    """z = v - v^d"""
    return v - v_d


def matrices_from_theta(theta_hat: Vector, v: Vector, floor: float | None = None) -> ModelMatrices:
    """
    Model matrices built from the current parameter estimate

    The identity Psi(v, tau) theta = -C_bar v - D_bar v - G_bar + B_bar tau holds
    whenever no input coefficient needed regularization.

    Args:
        theta_hat: Estimated parameter vector
        v: Body velocity the Coriolis matrix is evaluated at
        floor: Smallest admissible B_bar entry (default: settings.b_bar_floor)

    Returns:
        ModelMatrices with a flag set when B_bar was regularized
    """
    eps = settings.b_bar_floor if floor is None else floor
    b_diag = theta_hat[INPUT_COLUMNS].copy()
    # input coefficients are reciprocal inertias, so positive
    small = b_diag < eps
    b_diag[small] = eps

    vx, vy, vz, wx, wy, wz = (float(x) for x in v)
    th = theta_hat
    C = np.zeros((6, 6))
    C[0, 2], C[0, 1] = -th[0] * wy, -th[1] * wz
    C[1, 2], C[1, 0] = -th[4] * wx, -th[5] * wz
    C[2, 1], C[2, 0] = -th[8] * wx, -th[9] * wy
    C[3, 2], C[3, 5] = -th[12] * vy, -th[13] * wy
    C[4, 2], C[4, 5] = -th[16] * vx, -th[17] * wx
    C[5, 1], C[5, 4] = -th[20] * vx, -th[21] * wx

    return ModelMatrices(
        B_bar=np.diag(b_diag),
        C_bar=C,
        D_bar=-np.diag(theta_hat[DAMPING_COLUMNS]),
        G_bar=np.zeros(6),
        regularized=bool(np.any(small)),
    )


def boundary_saturation(z: Vector, width: float) -> Vector:
    """sat(z) = z / width clipped to [-1, 1]"""
    return np.clip(z / width, -1.0, 1.0)


@dataclass(frozen=True)
class _Equivalent:
    error: Vector
    v_d: Vector
    z: Vector
    feedforward: Vector
    b_diag: Vector
    regularized: bool


def _equivalent_control(view: NeighborhoodView, est: EstimatorState, gains: ControlGains) -> _Equivalent:
    v = view.self_state.nu
    v_d = virtual_velocity(view, gains.K1)
    v_d_dot = virtual_velocity_rate(view, gains.K1)
    mats = matrices_from_theta(est.theta_hat, v, gains.b_floor)
    feedforward = v_d_dot + mats.C_bar @ v + mats.D_bar @ v + mats.G_bar
    return _Equivalent(
        error=consensus_error(view),
        v_d=v_d,
        z=auxiliary_z(v, v_d),
        feedforward=feedforward,
        b_diag=np.diag(mats.B_bar).copy(),
        regularized=mats.regularized,
    )


def _finish(eq: _Equivalent, feedback: Vector, gains: ControlGains) -> ControlOutput:
    tau = (eq.feedforward - gains.K2 * feedback) / eq.b_diag
    if gains.tau_limit is not None:
        tau = np.clip(tau, -gains.tau_limit, gains.tau_limit)
    return ControlOutput(tau=tau, error=eq.error, z=eq.z, v_d=eq.v_d, regularized=eq.regularized)


def blc_control(
    view: NeighborhoodView,
    est: EstimatorState,
    neuro: NeuroState,
    gains: ControlGains,
) -> ControlOutput:
    """Bioinspired law: tau = B_bar^-1 [v^d_dot + C_bar v + D_bar v + G_bar - K2 vartheta]"""
    return _finish(_equivalent_control(view, est, gains), neuro.vartheta, gains)


def lc_control(view: NeighborhoodView, est: EstimatorState, gains: ControlGains) -> ControlOutput:
    """Learning-based backstepping baseline: feedback on z itself"""
    eq = _equivalent_control(view, est, gains)
    return _finish(eq, eq.z, gains)


def lsmc_control(view: NeighborhoodView, est: EstimatorState, gains: ControlGains) -> ControlOutput:
    """Learning-based sliding-mode baseline: feedback on the boundary-layer saturation of z"""
    eq = _equivalent_control(view, est, gains)
    return _finish(eq, boundary_saturation(eq.z, gains.sat_layer), gains)


ControlLaw = Callable[[NeighborhoodView, EstimatorState, NeuroState, ControlGains], ControlOutput]

CONTROL_LAWS: Dict[str, ControlLaw] = {
    "blc": blc_control,
    "lc": lambda view, est, neuro, gains: lc_control(view, est, gains),
    "lsmc": lambda view, est, neuro, gains: lsmc_control(view, est, gains),
}


def get_control_law(name: str) -> ControlLaw:
    """Look up a control law by its lowercase name"""
    try:
        return CONTROL_LAWS[name.lower()]
    except KeyError:
        raise ValueError(f"Unknown controller '{name}', expected one of {sorted(CONTROL_LAWS)}") from None


def uses_shunting(name: str) -> bool:
    return name.lower() == "blc"
