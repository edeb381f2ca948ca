"""Online parameter estimator: velocity observer with gradient adaptation"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from fleetsim.dynamics.vessel_model import N_DOF, N_THETA


@dataclass(frozen=True)
class EstimatorState:
    """
    Observer state of one vessel

    Attributes:
        v_hat: Observed body velocity [m/s, rad/s]
        theta_hat: Current estimate of the 24 dynamic parameters
    """

    v_hat: NDArray[np.float64]
    theta_hat: NDArray[np.float64]

    @classmethod
    def initial(cls, v_measured: NDArray[np.float64], theta0: NDArray[np.float64] | None = None) -> "EstimatorState":
        """Start with v_hat = measured v and, unless given, a zero parameter estimate"""
        theta = np.zeros(N_THETA) if theta0 is None else np.asarray(theta0, dtype=np.float64).copy()
        return cls(v_hat=np.asarray(v_measured, dtype=np.float64).copy(), theta_hat=theta)


@dataclass(frozen=True)
class EstimatorGains:
    """Diagonals of the observer gain L and adaptation gain P"""

    L_gain: NDArray[np.float64]
    P_gain: NDArray[np.float64]

    def __post_init__(self) -> None:
        for name in ("L_gain", "P_gain"):
            diag = getattr(self, name)
            if diag.shape != (N_DOF,) or np.any(diag <= 0.0):
                raise ValueError(f"{name} must be a strictly positive length-6 diagonal, got {diag.tolist()}")

    @classmethod
    def from_diagonals(cls, L_diag: Sequence[float], P_diag: Sequence[float]) -> "EstimatorGains":
        return cls(np.asarray(L_diag, dtype=np.float64), np.asarray(P_diag, dtype=np.float64))


def estimator_rates(
    s: EstimatorState,
    v_measured: NDArray[np.float64],
    psi: NDArray[np.float64],
    g: EstimatorGains,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Observer and adaptation rates

    v_hat_dot = psi theta_hat - L (v_hat - v);  theta_dot = -psi^T P (v_hat - v)

    Args:
        s: Current estimator state
        v_measured: Measured body velocity (possibly noisy)
        psi: 6x24 regression matrix built from the measured velocity and applied input
        g: Estimator gains

    Returns:
        (v_hat_dot, theta_dot)
    """
    v_tilde = s.v_hat - v_measured
    v_hat_dot = psi @ s.theta_hat - g.L_gain * v_tilde
    theta_dot = -psi.T @ (g.P_gain * v_tilde)
    return v_hat_dot, theta_dot


def estimation_diagnostics(
    s: EstimatorState,
    v_measured: NDArray[np.float64],
    theta_true: NDArray[np.float64],
) -> Tuple[float, float]:
    """Observation and parameter error norms (theta* is only known to the simulator)"""
    return (
        float(np.linalg.norm(s.v_hat - v_measured)),
        float(np.linalg.norm(s.theta_hat - theta_true)),
    )


def lyapunov_value(
    s: EstimatorState,
    v_true: NDArray[np.float64],
    theta_true: NDArray[np.float64],
    g: EstimatorGains,
) -> float:
    """V1 = 1/2 v_tilde^T P v_tilde + 1/2 theta_tilde^T theta_tilde"""
    v_tilde = s.v_hat - v_true
    theta_tilde = s.theta_hat - theta_true
    return 0.5 * float(v_tilde @ (g.P_gain * v_tilde)) + 0.5 * float(theta_tilde @ theta_tilde)
