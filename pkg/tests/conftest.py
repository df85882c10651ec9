import numpy as np
import pytest

from predprey.clf import Clf, ClfId
from predprey.dynamics import PopulationState


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_states(rng):
    """1000 log-uniform states in [e^-3, e^3]^2."""
    q = rng.uniform(-3.0, 3.0, size=(2, 1000))
    return PopulationState(np.exp(q[0]), np.exp(q[1]))


ALL_CLFS = [
    Clf(ClfId.V1_SF),
    Clf(ClfId.V_SF_STRICT),
    Clf(ClfId.V1_BOTH, 0.5),
    Clf(ClfId.V_BOTH_STRICT, 0.5),
    Clf(ClfId.V_BOTH_STRICT, 0.1),
    Clf(ClfId.V_BOTH_STRICT, 0.9),
    Clf(ClfId.V_FORWARDING),
    Clf(ClfId.V_BACKSTEPPING),
]


# -- acceptance summary ------------------------------------------------------

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Print and collect one PASS/FAIL line, then assert on it."""

    def _record(label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        print(line)
        _ACCEPTANCE_LINES.append(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
