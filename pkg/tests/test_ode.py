import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from predprey.ode import IntegrationError, dopri5


def test_harmonic_oscillator_against_exact_solution():
    sol = dopri5(lambda t, y: np.array([y[1], -y[0]]), 20.0, [1.0, 0.0], rtol=1e-11, atol=1e-13)
    t = np.linspace(0, 20, 401)
    y = sol(t)
    np.testing.assert_allclose(y[:, 0], np.cos(t), atol=1e-9)
    np.testing.assert_allclose(y[:, 1], -np.sin(t), atol=1e-9)


def test_exponential_decay_endpoint():
    sol = dopri5(lambda t, y: -2.0 * y, 3.0, [1.0], rtol=1e-10, atol=1e-14)
    assert sol.t_steps[-1] == 3.0
    assert sol.y_steps[-1, 0] == pytest.approx(math.exp(-6.0), rel=1e-8)


def test_dense_output_hits_step_values():
    sol = dopri5(lambda t, y: np.array([y[1], -y[0]]), 5.0, [0.0, 1.0])
    np.testing.assert_allclose(sol(sol.t_steps), sol.y_steps, atol=1e-14)


def test_matches_scipy_reference_on_nonlinear_system():
    def f(t, y):
        return np.array([(1 - y[1]) * y[0], (y[0] - 0.7) * y[1] - 0.1 * y[1] ** 2])

    ours = dopri5(f, 15.0, [2.0, 0.5], rtol=1e-10, atol=1e-12)
    ref = solve_ivp(f, (0, 15), [2.0, 0.5], method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
    t = np.linspace(0, 15, 300)
    np.testing.assert_allclose(ours(t), ref.sol(t).T, atol=1e-8)


def test_tighter_tolerance_takes_more_steps():
    f = lambda t, y: np.array([y[1], -y[0]])  # noqa: E731
    loose = dopri5(f, 10.0, [1.0, 0.0], rtol=1e-6, atol=1e-8)
    tight = dopri5(f, 10.0, [1.0, 0.0], rtol=1e-10, atol=1e-12)
    assert len(tight.t_steps) > len(loose.t_steps)


def test_max_step_is_respected():
    sol = dopri5(lambda t, y: -y, 2.0, [1.0], max_step=0.05)
    assert np.max(np.diff(sol.t_steps)) <= 0.05 + 1e-15


def test_deterministic():
    f = lambda t, y: np.array([y[1], -np.sin(y[0])])  # noqa: E731
    a = dopri5(f, 8.0, [1.0, 0.0])
    b = dopri5(f, 8.0, [1.0, 0.0])
    assert np.array_equal(a.t_steps, b.t_steps) and np.array_equal(a.y_steps, b.y_steps)


def test_finite_time_blowup_reports_failure_time():
    # y' = y^2, y(0) = 1 blows up at t = 1
    with pytest.raises(IntegrationError) as info:
        dopri5(lambda t, y: y**2, 2.0, [1.0], rtol=1e-8, atol=1e-10)
    assert info.value.t == pytest.approx(1.0, abs=1e-3)


def test_non_finite_initial_derivative():
    with pytest.raises(IntegrationError):
        dopri5(lambda t, y: np.array([np.nan]), 1.0, [1.0])
