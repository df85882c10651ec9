"""Predator-prey harvesting models and the coordinate systems used to analyse them.

Two plants are provided, both with unit coefficients::

    predator-only harvest:   dX/dt = (1 - Y) X,       dY/dt = (X - U) Y
    simultaneous harvest:    dX/dt = (2 - Y - U) X,   dY/dt = (X - U) Y

For ``U = 1`` they coincide and conserve ``X + Y - ln(XY)``.

Every function accepts scalars or equally-shaped numpy arrays, so the same
code evaluates a single state or a whole verification grid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "ModelId",
    "PopulationState",
    "LogState",
    "ForwardingState",
    "BacksteppingState",
    "Derivative",
    "phi",
    "vector_field",
    "log_vector_field",
    "coordinate_maps",
    "open_loop_invariant",
    "open_loop_invariant_gradient",
    "target_system_field",
]


class ModelId(enum.Enum):
    PREDATOR_ONLY = "predator-only"
    SIMULTANEOUS = "simultaneous"

    @classmethod
    def parse(cls, name: str | ModelId) -> ModelId:
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {
            "predator-only": cls.PREDATOR_ONLY,
            "predatoronlyharvest": cls.PREDATOR_ONLY,
            "1": cls.PREDATOR_ONLY,
            "simultaneous": cls.SIMULTANEOUS,
            "simultaneousharvest": cls.SIMULTANEOUS,
            "2": cls.SIMULTANEOUS,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(
                f"unknown model {name!r}; expected 'predator-only' or 'simultaneous'"
            ) from None


def _require_finite(name: str, *values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name}: non-finite input")


@dataclass(frozen=True)
class PopulationState:
    """Prey and predator concentrations, strictly inside the positive quadrant.

    ``X`` and ``Y`` may be floats or numpy arrays of a common shape.
    """

    X: float | np.ndarray
    Y: float | np.ndarray

    def __post_init__(self):
        _require_finite("PopulationState", self.X, self.Y)
        if not (np.all(np.asarray(self.X) > 0) and np.all(np.asarray(self.Y) > 0)):
            raise ValueError(
                "PopulationState requires X > 0 and Y > 0 (open positive quadrant)"
            )

    @classmethod
    def from_log(cls, ls: LogState) -> PopulationState:
        return cls(np.exp(ls.x), np.exp(ls.y))

    def to_log(self) -> LogState:
        return LogState(np.log(self.X), np.log(self.Y))

    def distance_to_equilibrium(self):
        return np.hypot(np.asarray(self.X) - 1.0, np.asarray(self.Y) - 1.0)

    def __iter__(self):
        yield self.X
        yield self.Y


@dataclass(frozen=True)
class LogState:
    x: float | np.ndarray
    y: float | np.ndarray

    def __post_init__(self):
        _require_finite("LogState", self.x, self.y)


@dataclass(frozen=True)
class ForwardingState:
    """``eta = -ln Y`` and the forwarded coordinate ``xi = ln X + eta``."""

    xi: float | np.ndarray
    eta: float | np.ndarray

    @property
    def x(self):
        return self.xi - self.eta


@dataclass(frozen=True)
class BacksteppingState:
    """``x = ln X`` and the log predator-to-prey ratio ``z = ln(Y/X)``."""

    x: float | np.ndarray
    z: float | np.ndarray

    def __post_init__(self):
        _require_finite("BacksteppingState", self.x, self.z)

    @property
    def y(self):
        return self.x + self.z

    def to_population(self) -> PopulationState:
        return PopulationState(np.exp(self.x), np.exp(self.x + self.z))


class Derivative(NamedTuple):
    dX: float | np.ndarray
    dY: float | np.ndarray


def phi(s):
    """``e^s - 1``, evaluated without cancellation near zero."""
    return np.expm1(s)


def _field(model: ModelId, X, Y, U):
    dY = (X - U) * Y
    if model is ModelId.PREDATOR_ONLY:
        return (1.0 - Y) * X, dY
    return (2.0 - Y - U) * X, dY


def _log_field(model: ModelId, x, y, U):
    X = np.exp(x)
    dy = X - U
    if model is ModelId.PREDATOR_ONLY:
        return -np.expm1(y), dy
    return 2.0 - np.exp(y) - U, dy


def vector_field(model: ModelId | str, s: PopulationState, U) -> Derivative:
    """Time derivative ``(dX/dt, dY/dt)`` of the chosen model at harvest rate ``U``.

    Negative ``U`` is accepted; whether a law is admissible is the
    controller's business, not the plant's.
    """
    model = ModelId.parse(model)
    _require_finite("vector_field", U)
    return Derivative(*_field(model, s.X, s.Y, U))


def log_vector_field(model: ModelId | str, ls: LogState, U):
    """Derivative in ``x = ln X, y = ln Y``: ``(dX/X, dY/Y)``."""
    model = ModelId.parse(model)
    _require_finite("log_vector_field", U)
    return _log_field(model, ls.x, ls.y, U)


def coordinate_maps(s: PopulationState):
    """Return the log, forwarding and backstepping coordinates of ``s``."""
    x = np.log(s.X)
    y = np.log(s.Y)
    eta = -y
    return (
        LogState(x, y),
        ForwardingState(x + eta, eta),
        BacksteppingState(x, y - x),
    )


def open_loop_invariant(s: PopulationState):
    """``X + Y - ln(XY)``; conserved by both models when ``U = 1``."""
    return s.X + s.Y - np.log(s.X) - np.log(s.Y)


def open_loop_invariant_gradient(s: PopulationState):
    return 1.0 - 1.0 / s.X, 1.0 - 1.0 / s.Y


def target_system_field(bs: BacksteppingState):
    """Closed loop of the predator-only model under ``U = Y^2/X`` in ``(x, z)``.

    The ratio ``phi(x)/phi(-x)`` equals ``-e^x`` identically, so the first
    component reduces to ``1 - e^(x+z)`` and stays well defined at ``x = 0``.
    Inside ``e^(y+z)`` the log predator ``y`` is ``x + z``.
    """
    x, z = bs.x, bs.z
    dx = -np.expm1(x + z)
    dz = np.expm1(x) + np.exp(x + 2.0 * z) * np.expm1(-z)
    return dx, dz
