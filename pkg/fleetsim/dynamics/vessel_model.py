"""6-DOF vessel plant: Euler kinematics, regression-form dynamics and the true parameter vector"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from fleetsim.config.settings import settings

N_DOF = 6
N_THETA = 24

# Column of each DOF's input coefficient in theta (0-based)
INPUT_COLUMNS = np.arange(3, N_THETA, 4)
DAMPING_COLUMNS = np.arange(2, N_THETA, 4)

# Nonzero pattern of the 6x24 regression matrix, row-major over (cross1, cross2, damping, input)
_PSI_ROWS = np.repeat(np.arange(N_DOF), 4)
_PSI_COLS = np.arange(N_THETA)


class SingularityError(ValueError):
    """Raised when pitch is too close to +-pi/2 for the Euler-angle transform"""


class PhysicalParamsError(ValueError):
    """Raised when physical parameters give a non-positive effective inertia"""


@dataclass(frozen=True)
class VesselState:
    """
    Pose and body velocity of one vessel

    Attributes:
        eta: (x, y, z, phi, theta, psi) in the Earth-fixed frame [m, rad]
        nu: (v_x, v_y, v_z, w_x, w_y, w_z) in the body frame [m/s, rad/s]
    """

    eta: NDArray[np.float64]
    nu: NDArray[np.float64]

    @classmethod
    def from_arrays(cls, eta, nu) -> "VesselState":
        return cls(np.asarray(eta, dtype=np.float64), np.asarray(nu, dtype=np.float64))


@dataclass(frozen=True)
class PhysicalParams:
    """
    Rigid-body and hydrodynamic coefficients of one vessel (SI units)

    Added-mass coefficients follow the negative sign convention, so the
    effective inertia of a DOF is m - beta_dot (or I - beta_dot).
    """

    m: float
    I_x: float
    I_y: float
    I_z: float
    beta_vx: float
    beta_vy: float
    beta_vz: float
    beta_wx: float
    beta_wy: float
    beta_wz: float
    beta_dvx: float
    beta_dvy: float
    beta_dvz: float
    beta_dwx: float
    beta_dwy: float
    beta_dwz: float

    def effective_inertia(self) -> NDArray[np.float64]:
        """Diagonal of M: rigid-body plus added mass per DOF"""
        return np.array(
            [
                self.m - self.beta_dvx,
                self.m - self.beta_dvy,
                self.m - self.beta_dvz,
                self.I_x - self.beta_dwx,
                self.I_y - self.beta_dwy,
                self.I_z - self.beta_dwz,
            ]
        )

    def linear_damping(self) -> NDArray[np.float64]:
        """beta_v / beta_w coefficients in DOF order"""
        return np.array(
            [self.beta_vx, self.beta_vy, self.beta_vz, self.beta_wx, self.beta_wy, self.beta_wz]
        )

    def validate(self) -> None:
        if self.m <= 0.0 or min(self.I_x, self.I_y, self.I_z) <= 0.0:
            raise PhysicalParamsError("Mass and inertias must be positive")
        inertia = self.effective_inertia()
        if np.any(inertia <= 0.0):
            bad = [int(k) for k in np.flatnonzero(inertia <= 0.0)]
            raise PhysicalParamsError(f"Non-positive effective inertia in DOF {bad}: {inertia.tolist()}")


# Parameters shared by the four vessels of the reference experiments
REFERENCE_PARAMS = PhysicalParams(
    m=25.0,
    I_x=25.0,
    I_y=20.0,
    I_z=30.0,
    beta_vx=-10.0,
    beta_vy=-8.0,
    beta_vz=-12.0,
    beta_wx=-0.35,
    beta_wy=-0.2,
    beta_wz=-0.25,
    beta_dvx=-8.0,
    beta_dvy=-6.0,
    beta_dvz=-8.0,
    beta_dwx=-25.0,
    beta_dwy=-35.0,
    beta_dwz=-30.0,
)


def skew(a: NDArray[np.float64]) -> NDArray[np.float64]:
    """S(a) with S(a) b = a x b"""
    return np.array(
        [
            [0.0, -a[2], a[1]],
            [a[2], 0.0, -a[0]],
            [-a[1], a[0], 0.0],
        ]
    )


def _check_pitch(theta: float, guard: float | None) -> None:
    limit = math.pi / 2.0 - (settings.pitch_guard if guard is None else guard)
    if not abs(theta) < limit:
        raise SingularityError(f"Pitch {theta:.6f} rad is within the singularity guard of +-pi/2")


def _rotation(phi: float, theta: float, psi: float) -> NDArray[np.float64]:
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return np.array(
        [
            [cpsi * cth, -spsi * cphi + cpsi * sth * sphi, spsi * sphi + cpsi * cphi * sth],
            [spsi * cth, cpsi * cphi + sphi * sth * spsi, -cpsi * sphi + sth * spsi * cphi],
            [-sth, cth * sphi, cth * cphi],
        ]
    )


def _euler_rate_map(phi: float, theta: float) -> NDArray[np.float64]:
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [1.0, sphi * sth / cth, cphi * sth / cth],
            [0.0, cphi, -sphi],
            [0.0, sphi / cth, cphi / cth],
        ]
    )


def transform_jacobian(eta2: NDArray[np.float64], guard: float | None = None) -> NDArray[np.float64]:
    """
    Body-to-Earth transform J = blkdiag(R, T) for ZYX Euler angles

    Args:
        eta2: (phi, theta, psi) [rad]
        guard: Pitch singularity guard [rad] (default: settings.pitch_guard)

    Returns:
        6x6 matrix mapping body velocity to pose rate

    Raises:
        SingularityError: pitch within the guard of +-pi/2
    """
    phi, theta, psi = float(eta2[0]), float(eta2[1]), float(eta2[2])
    _check_pitch(theta, guard)
    J = np.zeros((6, 6))
    J[:3, :3] = _rotation(phi, theta, psi)
    J[3:, 3:] = _euler_rate_map(phi, theta)
    return J


def inverse_transform_jacobian(eta2: NDArray[np.float64], guard: float | None = None) -> NDArray[np.float64]:
    """J^-1 = blkdiag(R^T, T^-1) in closed form"""
    phi, theta, psi = float(eta2[0]), float(eta2[1]), float(eta2[2])
    _check_pitch(theta, guard)
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    J_inv = np.zeros((6, 6))
    J_inv[:3, :3] = _rotation(phi, theta, psi).T
    J_inv[3:, 3:] = np.array(
        [
            [1.0, 0.0, -sth],
            [0.0, cphi, cth * sphi],
            [0.0, -sphi, cth * cphi],
        ]
    )
    return J_inv


def transform_jacobian_rate(
    eta2: NDArray[np.float64],
    eta2_dot: NDArray[np.float64],
    guard: float | None = None,
) -> NDArray[np.float64]:
    """
    Time derivative of J along the Euler-angle rate eta2_dot

    Args:
        eta2: (phi, theta, psi) [rad]
        eta2_dot: Euler-angle rates [rad/s]
        guard: Pitch singularity guard [rad]

    Returns:
        6x6 matrix dJ/dt
    """
    phi, theta, psi = float(eta2[0]), float(eta2[1]), float(eta2[2])
    dphi, dtheta, dpsi = float(eta2_dot[0]), float(eta2_dot[1]), float(eta2_dot[2])
    _check_pitch(theta, guard)

    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)

    Rz = np.array([[cpsi, -spsi, 0.0], [spsi, cpsi, 0.0], [0.0, 0.0, 1.0]])
    Ry = np.array([[cth, 0.0, sth], [0.0, 1.0, 0.0], [-sth, 0.0, cth]])
    Rx = np.array([[1.0, 0.0, 0.0], [0.0, cphi, -sphi], [0.0, sphi, cphi]])
    dRz = np.array([[-spsi, -cpsi, 0.0], [cpsi, -spsi, 0.0], [0.0, 0.0, 0.0]])
    dRy = np.array([[-sth, 0.0, cth], [0.0, 0.0, 0.0], [-cth, 0.0, -sth]])
    dRx = np.array([[0.0, 0.0, 0.0], [0.0, -sphi, -cphi], [0.0, cphi, -sphi]])
    R_dot = (
        dpsi * (dRz @ Ry @ Rx)
        + dtheta * (Rz @ dRy @ Rx)
        + dphi * (Rz @ Ry @ dRx)
    )

    tth = sth / cth
    sec2 = 1.0 / (cth * cth)
    dT_dphi = np.array(
        [
            [0.0, cphi * tth, -sphi * tth],
            [0.0, -sphi, -cphi],
            [0.0, cphi / cth, -sphi / cth],
        ]
    )
    dT_dtheta = np.array(
        [
            [0.0, sphi * sec2, cphi * sec2],
            [0.0, 0.0, 0.0],
            [0.0, sphi * sth * sec2, cphi * sth * sec2],
        ]
    )

    J_dot = np.zeros((6, 6))
    J_dot[:3, :3] = R_dot
    J_dot[3:, 3:] = dphi * dT_dphi + dtheta * dT_dtheta
    return J_dot


def theta_from_physical(p: PhysicalParams) -> NDArray[np.float64]:
    """
    True parameter vector theta* of the regression form

    Per DOF the four entries are (cross-term 1, cross-term 2, damping, input)
    coefficients of v_dot = M^-1 (tau - C(v) v - D v) with diagonal M,
    D = -diag(beta) and the skew-symmetric Coriolis matrix induced by M.

    Args:
        p: Physical parameters

    Returns:
        Length-24 theta*

    Raises:
        PhysicalParamsError: non-positive effective inertia
    """
    p.validate()
    m1, m2, m3, m4, m5, m6 = p.effective_inertia()
    beta = p.linear_damping()
    cross = np.array(
        [
            [-m3 / m1, m2 / m1],
            [m3 / m2, -m1 / m2],
            [-m2 / m3, m1 / m3],
            [(m2 - m3) / m4, (m5 - m6) / m4],
            [(m3 - m1) / m5, (m6 - m4) / m5],
            [(m1 - m2) / m6, (m4 - m5) / m6],
        ]
    )
    inertia = np.array([m1, m2, m3, m4, m5, m6])
    theta = np.empty(N_THETA)
    theta[0::4] = cross[:, 0]
    theta[1::4] = cross[:, 1]
    theta[2::4] = beta / inertia
    theta[3::4] = 1.0 / inertia
    return theta


def mass_matrix(p: PhysicalParams) -> NDArray[np.float64]:
    return np.diag(p.effective_inertia())


def coriolis_matrix(p: PhysicalParams, nu: NDArray[np.float64]) -> NDArray[np.float64]:
    """Skew-symmetric C(v) of a diagonal inertia matrix"""
    inertia = p.effective_inertia()
    p1 = inertia[:3] * nu[:3]
    p2 = inertia[3:] * nu[3:]
    C = np.zeros((6, 6))
    C[:3, 3:] = -skew(p1)
    C[3:, :3] = -skew(p1)
    C[3:, 3:] = -skew(p2)
    return C


def damping_matrix(p: PhysicalParams) -> NDArray[np.float64]:
    return -np.diag(p.linear_damping())


def velocity_regression(nu: NDArray[np.float64], tau: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    6x24 regression matrix Psi(v, tau) with v_dot = Psi theta

    The pose never enters the regressor, only the body velocity and input.

    Args:
        nu: Body velocity (v_x, v_y, v_z, w_x, w_y, w_z)
        tau: Generalized input

    Returns:
        Sparse-pattern 6x24 matrix, four nonzero slots per row
    """
    vx, vy, vz, wx, wy, wz = (float(x) for x in nu)
    values = np.array(
        [
            vz * wy, vy * wz, vx, tau[0],
            vz * wx, vx * wz, vy, tau[1],
            vy * wx, vx * wy, vz, tau[2],
            vy * vz, wy * wz, wx, tau[3],
            vx * vz, wx * wz, wy, tau[4],
            vx * vy, wx * wy, wz, tau[5],
        ],
        dtype=np.float64,
    )
    psi = np.zeros((N_DOF, N_THETA))
    psi[_PSI_ROWS, _PSI_COLS] = values
    return psi


def regression(state: VesselState, tau: NDArray[np.float64]) -> NDArray[np.float64]:
    """Psi evaluated at a vessel state"""
    return velocity_regression(state.nu, tau)


def plant_acceleration(
    state: VesselState,
    tau: NDArray[np.float64],
    theta_true: NDArray[np.float64],
    d_tilde: NDArray[np.float64],
) -> NDArray[np.float64]:
    """v_dot = Psi(v, tau) theta* + d_tilde"""
    return velocity_regression(state.nu, tau) @ theta_true + d_tilde


def kinematics_rate(state: VesselState, guard: float | None = None) -> NDArray[np.float64]:
    """eta_dot = J(eta2) v"""
    return transform_jacobian(state.eta[3:], guard) @ state.nu
