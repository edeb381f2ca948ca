"""Tests for the velocity observer and gradient parameter adaptation"""

from __future__ import annotations

import numpy as np
import pytest

from fleetsim.dynamics.estimator import (
    EstimatorGains,
    EstimatorState,
    estimation_diagnostics,
    estimator_rates,
    lyapunov_value,
)
from fleetsim.dynamics.vessel_model import (
    N_THETA,
    REFERENCE_PARAMS,
    VesselState,
    plant_acceleration,
    theta_from_physical,
    velocity_regression,
)
from fleetsim.services.sim_engine import rk4_step

GAINS = EstimatorGains.from_diagonals([100.0] * 6, [0.1] * 6)


def multisine(amplitudes: np.ndarray):
    freqs = np.array([1.0, 1.3, 1.7, 1.1, 1.5, 1.9])
    phases = np.arange(6, dtype=float)

    def tau(t: float) -> np.ndarray:
        return amplitudes * (np.sin(freqs * t) + 0.5 * np.sin(2.3 * freqs * t + phases))

    return tau


def integrate_single_vessel(theta_star, tau_fn, horizon, dt=1e-3, d_tilde=None):
    """
    Plant velocity plus estimator, without kinematics

    Returns:
        times, true velocities, estimator states at every step
    """
    d_fn = d_tilde or (lambda t: np.zeros(6))

    def rhs(t, x):
        v, v_hat, theta_hat = x[:6], x[6:12], x[12:]
        tau = tau_fn(t)
        v_dot = plant_acceleration(VesselState(np.zeros(6), v), tau, theta_star, d_fn(t))
        rates = estimator_rates(EstimatorState(v_hat, theta_hat), v, velocity_regression(v, tau), GAINS)
        return np.concatenate([v_dot, *rates])

    x = np.zeros(12 + N_THETA)
    n = int(round(horizon / dt))
    times = np.arange(n + 1) * dt
    states = np.empty((n + 1, x.size))
    states[0] = x
    for k in range(n):
        x = rk4_step(rhs, times[k], x, dt)
        states[k + 1] = x
    return times, states


EXCITATION = np.array([20.0, 20.0, 20.0, 2.0, 2.0, 2.0])


def tapered(tau_fn, hold: float = 6.0, fade: float = 2.0):
    """tau_fn until hold, a cos^2 fade to zero over fade seconds, then rest"""

    def tau(t: float) -> np.ndarray:
        if t <= hold:
            return tau_fn(t)
        if t >= hold + fade:
            return np.zeros(6)
        return np.cos(0.5 * np.pi * (t - hold) / fade) ** 2 * tau_fn(t)

    return tau


@pytest.fixture(scope="module")
def excited_then_settled():
    """20 s run: multisine excitation for 6 s, fade out, then the vessel coasts"""
    theta = theta_from_physical(REFERENCE_PARAMS)
    times, states = integrate_single_vessel(theta, tapered(multisine(EXCITATION)), horizon=20.0)
    return theta, times, states


class TestEstimatorRates:
    def test_zero_observation_error_freezes_adaptation(self, rng):
        v = rng.normal(size=6)
        s = EstimatorState(v.copy(), rng.normal(size=N_THETA))
        psi = velocity_regression(v, rng.normal(size=6))
        v_hat_dot, theta_dot = estimator_rates(s, v, psi, GAINS)
        assert np.array_equal(theta_dot, np.zeros(N_THETA))
        assert np.allclose(v_hat_dot, psi @ s.theta_hat, atol=0.0)

    def test_pure_observer_decay(self):
        e = np.array([1.0, -2.0, 0.5, 0.0, 3.0, -1.0])
        s = EstimatorState(e.copy(), np.ones(N_THETA))
        v_hat_dot, theta_dot = estimator_rates(s, np.zeros(6), np.zeros((6, N_THETA)), GAINS)
        assert np.allclose(v_hat_dot, -100.0 * e)
        assert np.array_equal(theta_dot, np.zeros(N_THETA))

    def test_single_regressor_entry(self):
        psi = np.zeros((6, N_THETA))
        psi[0, 2] = 1.0
        s = EstimatorState(np.array([1.0, 0, 0, 0, 0, 0]), np.zeros(N_THETA))
        _, theta_dot = estimator_rates(s, np.zeros(6), psi, GAINS)
        assert np.count_nonzero(theta_dot) == 1
        assert theta_dot[2] == pytest.approx(-0.1)

    def test_initial_state(self):
        v = np.arange(6, dtype=float)
        s = EstimatorState.initial(v)
        assert np.array_equal(s.v_hat, v)
        assert np.array_equal(s.theta_hat, np.zeros(N_THETA))
        v[0] = 99.0
        assert s.v_hat[0] == 0.0

    def test_gains_must_be_positive(self):
        with pytest.raises(ValueError):
            EstimatorGains.from_diagonals([100.0] * 5 + [0.0], [0.1] * 6)
        with pytest.raises(ValueError):
            EstimatorGains.from_diagonals([100.0] * 6, [0.1] * 5)


class TestDiagnostics:
    def test_perfect_estimates(self, theta_star):
        v = np.ones(6)
        assert estimation_diagnostics(EstimatorState(v.copy(), theta_star.copy()), v, theta_star) == (0.0, 0.0)

    def test_observation_norm(self, theta_star):
        s = EstimatorState(np.array([3.0, 4.0, 0, 0, 0, 0]), theta_star.copy())
        assert estimation_diagnostics(s, np.zeros(6), theta_star)[0] == pytest.approx(5.0)

    def test_parameter_norm(self, theta_star):
        theta = theta_star.copy()
        theta[7] += 1.0
        assert estimation_diagnostics(EstimatorState(np.zeros(6), theta), np.zeros(6), theta_star)[1] == pytest.approx(1.0)


class TestConvergence:
    def test_observation_error_vanishes_under_excitation(self, excited_then_settled):
        theta_star, _, states = excited_then_settled
        final = states[-1]
        obs, param = estimation_diagnostics(EstimatorState(final[6:12], final[12:]), final[:6], theta_star)
        assert obs < 1e-3
        assert param < np.linalg.norm(theta_star)

    def test_lyapunov_non_increasing(self, excited_then_settled):
        theta_star, times, states = excited_then_settled
        dt = times[1] - times[0]
        V = np.array([lyapunov_value(EstimatorState(x[6:12], x[12:]), x[:6], theta_star, GAINS) for x in states])
        assert np.all(np.diff(V) <= 1e-9 * dt * V[0])
        assert V[-1] < V[0]

    def test_excitation_fades_out(self):
        tau = tapered(multisine(EXCITATION))
        assert np.array_equal(tau(8.0), np.zeros(6))
        assert np.array_equal(tau(15.0), np.zeros(6))
        assert np.allclose(tau(6.0), multisine(EXCITATION)(6.0))
        assert np.all(np.abs(tau(7.0)) <= np.abs(multisine(EXCITATION)(7.0)))

    @pytest.mark.slow
    def test_bounded_under_disturbance(self, theta_star):
        tau = multisine(np.array([200.0, 200.0, 200.0, 50.0, 50.0, 50.0]))
        amplitude = np.array([110.0, 110.0, 110.0, 0.5, 0.5, 0.5]) / np.array([33.0, 31.0, 33.0, 50.0, 55.0, 60.0])

        def d_tilde(t):
            return amplitude * np.array([np.sin(t), np.cos(t), np.sin(t), np.sin(t), np.cos(t), np.sin(t)])

        times, states = integrate_single_vessel(theta_star, tau, horizon=40.0, d_tilde=d_tilde)
        obs = np.linalg.norm(states[:, 6:12] - states[:, :6], axis=1)
        first = obs[(times >= 5.0) & (times <= 20.0)].max()
        doubled = obs[(times >= 5.0) & (times <= 40.0)].max()
        assert np.isfinite(doubled)
        assert doubled <= 1.5 * first + 1e-9
