import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from predprey.controllers import ControllerKind, ControllerSpec, control, negativity_predicate
from predprey.dynamics import ModelId, PopulationState, coordinate_maps
from predprey.verifier import DomainGrid

ALL_SPECS = [
    ControllerSpec.constant(1.0),
    ControllerSpec.predator_linear(),
    ControllerSpec.mixed_linear(0.5),
    ControllerSpec.forwarding(),
    ControllerSpec.backstepping_conventional(),
    ControllerSpec.backstepping_positive(),
]
ALWAYS_POSITIVE = [
    ControllerSpec.constant(0.3),
    ControllerSpec.predator_linear(),
    ControllerSpec.mixed_linear(0.1),
    ControllerSpec.mixed_linear(0.9),
    ControllerSpec.backstepping_positive(),
]
logs = st.floats(-5.0, 5.0)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.name)
def test_equilibrium_value_is_one(spec):
    assert control(spec, PopulationState(1.0, 1.0)) == 1.0


@pytest.mark.parametrize(
    "spec, s, expected",
    [
        (ControllerSpec.forwarding(), (4.0, 0.5), -3.5),
        (ControllerSpec.backstepping_positive(), (4.0, 0.5), 0.0625),
        (ControllerSpec.mixed_linear(0.5), (1.0, 3.0), 2.0),
        (ControllerSpec.backstepping_conventional(), (3.0, 1.0), -1.0),
        (ControllerSpec.predator_linear(), (7.0, 0.25), 0.25),
        (ControllerSpec.constant(2.5), (0.1, 9.0), 2.5),
    ],
)
def test_control_examples(spec, s, expected):
    assert control(spec, PopulationState(*s)) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.2, 1.5, math.nan])
def test_mixed_linear_rejects_eps_outside_unit_interval(eps):
    with pytest.raises(ValueError):
        ControllerSpec.mixed_linear(eps)


@pytest.mark.parametrize("U0", [0.0, -1.0])
def test_constant_requires_positive_input(U0):
    with pytest.raises(ValueError):
        ControllerSpec.constant(U0)


def test_model_targets():
    assert ControllerSpec.constant().models == {ModelId.PREDATOR_ONLY, ModelId.SIMULTANEOUS}
    assert ControllerSpec.mixed_linear(0.5).models == {ModelId.SIMULTANEOUS}
    for spec in (ALL_SPECS[1], ALL_SPECS[3], ALL_SPECS[4], ALL_SPECS[5]):
        assert spec.models == {ModelId.PREDATOR_ONLY}


def test_parse_round_trip():
    for spec in ALL_SPECS:
        again = ControllerSpec.parse(spec.name, eps=spec.eps, U0=spec.U0)
        assert again == spec
    with pytest.raises(ValueError):
        ControllerSpec.parse("bang-bang")


@pytest.mark.parametrize(
    "spec, s, expected",
    [
        (ControllerSpec.forwarding(), (4.0, 0.5), True),
        (ControllerSpec.forwarding(), (1.0, 1.0), False),
        (ControllerSpec.forwarding(), (100.0, 2.0), False),
        (ControllerSpec.backstepping_conventional(), (3.0, 1.0), True),
        (ControllerSpec.backstepping_conventional(), (1.0, 1.0), False),
    ],
)
def test_negativity_examples(spec, s, expected):
    assert negativity_predicate(spec, PopulationState(*s)) is expected


@pytest.mark.parametrize("spec", ALWAYS_POSITIVE, ids=lambda s: s.name)
def test_sign_definite_laws_flagged_and_positive(spec):
    assert not spec.may_go_negative
    pts = DomainGrid(3.0, 200).points()
    assert np.all(control(spec, pts) > 0)
    assert not np.any(negativity_predicate(spec, pts))


@pytest.mark.parametrize("spec", [ALL_SPECS[3], ALL_SPECS[4]], ids=lambda s: s.name)
@given(x=logs, y=logs)
def test_predicate_agrees_with_sign(spec, x, y):
    s = PopulationState(math.exp(x), math.exp(y))
    U = control(spec, s)
    if abs(U) > 1e-12 * max(1.0, s.X / s.Y, s.Y):
        assert negativity_predicate(spec, s) == (U < 0)


def test_positive_backstepping_in_log_coordinates(random_states):
    _, _, bs = coordinate_maps(random_states)
    U = control(ControllerSpec.backstepping_positive(), random_states)
    np.testing.assert_allclose(U, np.exp(bs.y + bs.z), rtol=1e-12)


def test_kind_names_are_stable():
    assert [k.value for k in ControllerKind] == [
        "constant", "predator-linear", "mixed-linear", "forwarding",
        "backstepping-conventional", "backstepping-positive",
    ]
