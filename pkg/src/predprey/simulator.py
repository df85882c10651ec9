"""Closed- and open-loop simulation in log coordinates.

The state is integrated as ``(ln X, ln Y)`` and exponentiated afterwards,
so every emitted state is strictly positive without clipping.  The
feedback is evaluated inside the right-hand side (continuous feedback).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import clf as catalog
from .clf import Clf
from .controllers import ControllerKind, ControllerSpec, _control
from .dynamics import (
    BacksteppingState,
    ModelId,
    PopulationState,
    _log_field,
    coordinate_maps,
    open_loop_invariant,
    target_system_field,
)
from .ode import IntegrationError, dopri5
from .verifier import VerificationReport

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "integrate",
    "invariant_drift",
    "clf_monotonicity",
    "convergence_time",
    "target_equivalence",
    "orbit_recurrence",
    "random_initial_conditions",
    "write_csv",
    "read_csv",
]


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    t_end: float = 50.0
    max_step: float = math.inf
    initial_step: float | None = None
    samples: int = 201

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            tol = getattr(self, name)
            if not (0.0 < tol <= 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2], got {tol!r}")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.samples < 200:
            raise ValueError("at least 200 output samples are required")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass
class Trajectory:
    """Uniformly sampled solution; ``U`` is the harvest rate actually applied."""

    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    model: ModelId
    controller: ControllerSpec
    clf_values: dict[str, np.ndarray] = field(default_factory=dict)
    n_steps: int = 0
    solution: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.X) == len(self.Y) == len(self.U) == n):
            raise ValueError("trajectory arrays must have equal length")
        if n and self.t[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not (np.all(self.X > 0) and np.all(self.Y > 0)):
            raise ValueError("trajectory left the open positive quadrant")

    @property
    def states(self) -> PopulationState:
        return PopulationState(self.X, self.Y)

    @property
    def final_state(self) -> PopulationState:
        return PopulationState(float(self.X[-1]), float(self.Y[-1]))

    def add_clf(self, clf: Clf) -> np.ndarray:
        v = catalog.value(clf, self.states)
        self.clf_values[clf.label] = v
        return v


def _closed_loop_rhs(model: ModelId, ctrl: ControllerSpec):
    def rhs(t, q):
        X = math.exp(q[0])
        Y = math.exp(q[1])
        U = _control(ctrl, X, Y)
        return np.array(_log_field(model, q[0], q[1], U))

    return rhs


def integrate(
    model: ModelId | str,
    ctrl: ControllerSpec,
    s0: PopulationState,
    cfg: IntegratorConfig = IntegratorConfig(),
    clfs=(),
) -> Trajectory:
    """Simulate ``model`` under feedback ``ctrl`` from ``s0`` over ``[0, cfg.t_end]``.

    Raises :class:`IntegrationError` (carrying the failure time) if the step
    size underflows or the field becomes non-finite.
    """
    model = ModelId.parse(model)
    q0 = [math.log(s0.X), math.log(s0.Y)]
    sol = dopri5(
        _closed_loop_rhs(model, ctrl), cfg.t_end, q0,
        rtol=cfg.rel_tol, atol=cfg.abs_tol,
        max_step=cfg.max_step, first_step=cfg.initial_step,
    )
    t = np.linspace(0.0, cfg.t_end, cfg.samples)
    q = sol(t)
    X, Y = np.exp(q[:, 0]), np.exp(q[:, 1])
    traj = Trajectory(t, X, Y, _control(ctrl, X, Y) * np.ones_like(X), model, ctrl,
                      n_steps=len(sol.t_steps) - 1, solution=sol)
    for c in clfs:
        traj.add_clf(c)
    return traj


def invariant_drift(traj: Trajectory) -> float:
    """Largest deviation of ``X + Y - ln(XY)`` from its initial value."""
    if not (traj.controller.kind is ControllerKind.CONSTANT and traj.controller.U0 == 1.0):
        raise ValueError("the invariant is conserved only under the constant input U = 1")
    C = open_loop_invariant(traj.states)
    return float(np.max(np.abs(C - C[0])))


def clf_monotonicity(traj: Trajectory, clf: Clf, slack: float = 1e-9) -> VerificationReport:
    """Check that ``clf`` never increases by more than ``slack`` between samples."""
    catalog.check_pairing(clf, traj.model, traj.controller)
    V = catalog.value(clf, traj.states)
    inc = np.diff(V)
    i = int(np.argmax(inc)) if inc.size else 0
    worst = float(inc[i]) if inc.size else -np.inf
    return VerificationReport(
        f"monotone[{clf.label}|{traj.controller.name}]",
        bool(worst <= slack),
        (float(traj.X[i + 1]), float(traj.Y[i + 1])),
        float(slack - worst),
        len(V),
        params={**clf.describe(), **traj.controller.describe(), "slack": slack},
    )


def convergence_time(traj: Trajectory, radius: float) -> float | None:
    """First sample time after which ``max(|X-1|, |Y-1|) < radius`` holds to the end.

    ``None`` means the ball was not reached (or not kept).
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    inside = np.maximum(np.abs(traj.X - 1.0), np.abs(traj.Y - 1.0)) < radius
    if not inside[-1]:
        return None
    outside = np.flatnonzero(~inside)
    k = 0 if outside.size == 0 else outside[-1] + 1
    return float(traj.t[k])


def orbit_recurrence(traj: Trajectory) -> tuple[float, float] | None:
    """First return of an orbit to its starting ray, as ``(time, distance)``.

    The crossing is located on the dense output by root finding on the
    log-space section through the equilibrium and the start point.
    """
    sol = traj.solution
    q0 = sol(0.0)[0]
    if np.hypot(*q0) == 0.0:
        return 0.0, 0.0

    def g(t):
        q = sol(t)[0]
        return q0[0] * q[1] - q0[1] * q[0]

    ts = np.linspace(0.0, traj.t[-1], 20 * len(traj.t))
    q = sol(ts)
    gv = q0[0] * q[:, 1] - q0[1] * q[:, 0]
    same_side = q @ q0 > 0
    # sign of the first departure sets the direction of a full turn
    k0 = int(np.argmax(np.abs(gv) > 1e-9))
    sign = np.sign(gv[k0])
    for i in range(k0, len(ts) - 1):
        if same_side[i + 1] and np.sign(gv[i]) != np.sign(gv[i + 1]) and np.sign(gv[i + 1]) == sign:
            tr = brentq(g, ts[i], ts[i + 1], xtol=1e-14, rtol=1e-14)
            X, Y = np.exp(sol(tr)[0])
            return tr, float(np.hypot(X - traj.X[0], Y - traj.Y[0]))
    return None


def target_equivalence(
    s0: PopulationState,
    cfg: IntegratorConfig = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, t_end=20.0),
    tol: float = 1e-6,
) -> VerificationReport:
    """Integrate the ``(x, z)`` target system and the ``(X, Y)`` closed loop
    under ``U = Y^2/X`` independently and compare them in the sup norm."""
    _, _, bs0 = coordinate_maps(s0)

    def rhs(t, q):
        return np.array(target_system_field(BacksteppingState(q[0], q[1])))

    sol = dopri5(rhs, cfg.t_end, [bs0.x, bs0.z], rtol=cfg.rel_tol, atol=cfg.abs_tol,
                 max_step=cfg.max_step, first_step=cfg.initial_step)
    t = np.linspace(0.0, cfg.t_end, cfg.samples)
    q = sol(t)
    Xt = np.exp(q[:, 0])
    Yt = np.exp(q[:, 0] + q[:, 1])
    direct = integrate(ModelId.PREDATOR_ONLY, ControllerSpec.backstepping_positive(), s0, cfg)
    gap = np.maximum(np.abs(Xt - direct.X), np.abs(Yt - direct.Y))
    i = int(np.argmax(gap))
    return VerificationReport(
        "target_system_equivalence", bool(gap[i] < tol), (float(direct.X[i]), float(direct.Y[i])),
        float(tol - gap[i]), len(t),
        params={"x0": [float(s0.X), float(s0.Y)], "t_end": cfg.t_end,
                "rel_tol": cfg.rel_tol, "sup_gap": float(gap[i])},
    )


def random_initial_conditions(count: int, seed: int, log_bound: float = 2.0) -> list[PopulationState]:
    """Log-uniform states in ``[e^-b, e^b]^2`` from numpy's PCG64 generator."""
    rng = np.random.Generator(np.random.PCG64(seed))
    q = rng.uniform(-log_bound, log_bound, size=(count, 2))
    return [PopulationState(float(math.exp(a)), float(math.exp(b))) for a, b in q]


def write_csv(traj: Trajectory, fh) -> None:
    """Write ``t,X,Y,U,<clf>...`` with 17 significant digits."""
    labels = list(traj.clf_values)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "X", "Y", "U", *labels])
    cols = [traj.t, traj.X, traj.Y, traj.U, *(traj.clf_values[k] for k in labels)]
    for row in zip(*cols):
        w.writerow([f"{v:.17g}" for v in row])


def read_csv(fh) -> dict[str, np.ndarray]:
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, j] for j, name in enumerate(header)}
