import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from predprey.controllers import ControllerSpec, control
from predprey.dynamics import (
    BacksteppingState,
    LogState,
    ModelId,
    PopulationState,
    coordinate_maps,
    log_vector_field,
    open_loop_invariant,
    open_loop_invariant_gradient,
    target_system_field,
    vector_field,
)
from predprey.ode import dopri5

P1, P2 = ModelId.PREDATOR_ONLY, ModelId.SIMULTANEOUS
logs = st.floats(-4.0, 4.0)


@pytest.mark.parametrize("bad", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0), (math.nan, 1.0), (math.inf, 1.0)])
def test_state_rejects_outside_open_quadrant(bad):
    with pytest.raises(ValueError):
        PopulationState(*bad)


def test_state_rejects_arrays_with_one_bad_entry():
    with pytest.raises(ValueError):
        PopulationState(np.array([1.0, -1.0]), np.array([1.0, 1.0]))


@pytest.mark.parametrize(
    "model, s, U, expected",
    [
        (P1, (1, 1), 1, (0, 0)),
        (P1, (2, 1), 1, (0, 1)),
        (P2, (2, 2), 1, (-2, 2)),
    ],
)
def test_vector_field_examples(model, s, U, expected):
    d = vector_field(model, PopulationState(*s), U)
    assert (d.dX, d.dY) == pytest.approx(expected, abs=0)


def test_vector_field_accepts_negative_input_rejects_nonfinite():
    vector_field(P1, PopulationState(1.0, 1.0), -3.0)
    with pytest.raises(ValueError):
        vector_field(P1, PopulationState(1.0, 1.0), math.nan)
    with pytest.raises(ValueError):
        log_vector_field(P1, LogState(0.0, 0.0), math.inf)


def test_log_vector_field_examples():
    assert log_vector_field(P1, LogState(0.0, 0.0), 1.0) == pytest.approx((0.0, 0.0), abs=0)
    assert log_vector_field(P1, LogState(math.log(2.0), 0.0), 1.0) == pytest.approx((0.0, 1.0), abs=1e-15)


@pytest.mark.parametrize("model", list(ModelId))
def test_log_field_is_componentwise_ratio(model, rng):
    q = rng.uniform(-3, 3, size=(2, 100))
    U = rng.uniform(-2, 3, size=100)
    s = PopulationState(np.exp(q[0]), np.exp(q[1]))
    dX, dY = vector_field(model, s, U)
    dx, dy = log_vector_field(model, LogState(q[0], q[1]), U)
    np.testing.assert_allclose(dx, dX / s.X, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(dy, dY / s.Y, rtol=1e-12, atol=1e-14)


@given(logs, logs)
def test_models_coincide_at_unit_input(x, y):
    s = PopulationState(math.exp(x), math.exp(y))
    a, b = vector_field(P1, s, 1.0), vector_field(P2, s, 1.0)
    scale = s.X * (2.0 + s.Y)
    assert abs(a.dX - b.dX) <= 4e-16 * scale
    assert a.dY == b.dY


def test_coordinate_maps_examples():
    ls, fs, bs = coordinate_maps(PopulationState(1.0, 1.0))
    assert (ls.x, ls.y, fs.xi, fs.eta, bs.x, bs.z) == (0, 0, 0, 0, 0, 0)
    ls, fs, bs = coordinate_maps(PopulationState(math.e, 1.0))
    assert (ls.x, ls.y) == pytest.approx((1.0, 0.0))
    assert (fs.xi, fs.eta) == pytest.approx((1.0, 0.0))
    assert (bs.x, bs.z) == pytest.approx((1.0, -1.0))


def test_coordinate_round_trip(random_states):
    ls, fs, bs = coordinate_maps(random_states)
    back = PopulationState.from_log(ls)
    np.testing.assert_allclose(back.X, random_states.X, rtol=1e-14)
    np.testing.assert_allclose(back.Y, random_states.Y, rtol=1e-14)
    np.testing.assert_allclose(fs.xi - fs.eta, ls.x, atol=1e-14)
    np.testing.assert_allclose(fs.eta, -ls.y, atol=0)
    np.testing.assert_allclose(bs.y, ls.y, atol=1e-14)
    np.testing.assert_allclose(bs.to_population().Y, random_states.Y, rtol=1e-13)


def test_open_loop_invariant_values():
    assert open_loop_invariant(PopulationState(1.0, 1.0)) == 2.0
    assert open_loop_invariant(PopulationState(2.0, 1.0)) == pytest.approx(3 - math.log(2), abs=1e-15)
    assert 3 - math.log(2) == pytest.approx(2.3069, abs=1e-4)


@given(logs, logs)
def test_invariant_has_zero_lie_derivative(x, y):
    s = PopulationState(math.exp(x), math.exp(y))
    gX, gY = open_loop_invariant_gradient(s)
    for model in ModelId:
        fX, fY = vector_field(model, s, 1.0)
        # gX fX = (X-1)(1-Y), gY fY = (Y-1)(X-1); compare at the summands' scale
        assert abs(gX * fX + gY * fY) <= 1e-12 * max(1.0, abs(gX * fX))


def test_invariant_drift_against_scipy_oracle():
    # independent integration (scipy DOP853, X-Y coordinates) from (0.5, 3)
    from scipy.integrate import solve_ivp

    sol = solve_ivp(lambda t, u: [(1 - u[1]) * u[0], (u[0] - 1) * u[1]], (0, 30), [0.5, 3.0],
                    method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
    t = np.linspace(0, 30, 3001)
    X, Y = sol.sol(t)
    C = open_loop_invariant(PopulationState(X, Y))
    assert np.max(np.abs(C - C[0])) < 1e-7


def test_target_system_examples():
    assert target_system_field(BacksteppingState(0.0, 0.0)) == pytest.approx((0.0, 0.0), abs=0)
    dx, dz = target_system_field(BacksteppingState(math.log(2.0), 0.0))
    assert (dx, dz) == pytest.approx((-1.0, 1.0), abs=1e-15)


def test_target_first_component_matches_literal_ratio_form(rng):
    # brute-force the printed form -phi(x) + phi(x)/phi(-x) phi(z) away from x = 0
    x = rng.uniform(-3, 3, 500)
    x = x[np.abs(x) > 1e-3]
    z = rng.uniform(-3, 3, x.size)
    phi = np.expm1
    literal = -phi(x) + phi(x) / phi(-x) * phi(z)
    dx, _ = target_system_field(BacksteppingState(x, z))
    np.testing.assert_allclose(dx, literal, rtol=1e-9, atol=1e-12)


def test_target_system_pullback_chain_rule(random_states):
    _, _, bs = coordinate_maps(random_states)
    dx, dz = target_system_field(bs)
    X, Y = random_states.X, random_states.Y
    U = control(ControllerSpec.backstepping_positive(), random_states)
    fX, fY = vector_field(P1, random_states, U)
    np.testing.assert_allclose(X * dx, fX, rtol=1e-10, atol=1e-10 * np.max(np.abs(X)))
    np.testing.assert_allclose(Y * (dx + dz), fY, rtol=1e-10, atol=1e-10 * np.max(np.abs(Y * X)))


def test_target_system_integrates_like_closed_loop():
    # DERIVED: integrate (x, z) and (ln X, ln Y) separately and compare
    s0 = PopulationState(2.0, 0.5)
    _, _, bs0 = coordinate_maps(s0)
    a = dopri5(lambda t, q: np.array(target_system_field(BacksteppingState(*q))), 5.0,
               [bs0.x, bs0.z], rtol=1e-11, atol=1e-13)
    b = dopri5(lambda t, q: np.array(log_vector_field(P1, LogState(*q), math.exp(2 * q[1] - q[0]))),
               5.0, [math.log(2.0), math.log(0.5)], rtol=1e-11, atol=1e-13)
    t = np.linspace(0, 5, 51)
    qa, qb = a(t), b(t)
    np.testing.assert_allclose(qa[:, 0], qb[:, 0], atol=1e-9)
    np.testing.assert_allclose(qa[:, 0] + qa[:, 1], qb[:, 1], atol=1e-9)
