"""Harvesting feedback laws.

All six laws take the value 1 at the equilibrium ``X = Y = 1``.  Two of
them (forwarding and conventional backstepping) go negative on part of the
quadrant; that is reported, never clipped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import ModelId, PopulationState

__all__ = [
    "ControllerKind",
    "ControllerSpec",
    "control",
    "negativity_predicate",
]


class ControllerKind(enum.Enum):
    CONSTANT = "constant"
    PREDATOR_LINEAR = "predator-linear"
    MIXED_LINEAR = "mixed-linear"
    FORWARDING = "forwarding"
    BACKSTEPPING_CONVENTIONAL = "backstepping-conventional"
    BACKSTEPPING_POSITIVE = "backstepping-positive"


_TARGETS = {
    ControllerKind.CONSTANT: frozenset(ModelId),
    ControllerKind.PREDATOR_LINEAR: frozenset({ModelId.PREDATOR_ONLY}),
    ControllerKind.MIXED_LINEAR: frozenset({ModelId.SIMULTANEOUS}),
    ControllerKind.FORWARDING: frozenset({ModelId.PREDATOR_ONLY}),
    ControllerKind.BACKSTEPPING_CONVENTIONAL: frozenset({ModelId.PREDATOR_ONLY}),
    ControllerKind.BACKSTEPPING_POSITIVE: frozenset({ModelId.PREDATOR_ONLY}),
}

_SIGN_INDEFINITE = {ControllerKind.FORWARDING, ControllerKind.BACKSTEPPING_CONVENTIONAL}


@dataclass(frozen=True)
class ControllerSpec:
    """One of the six feedback laws, with its parameter where it has one.

    Use the named constructors (``ControllerSpec.mixed_linear(0.5)`` etc.)
    or :meth:`parse` for CLI names.
    """

    kind: ControllerKind
    eps: float | None = None
    U0: float | None = None

    def __post_init__(self):
        if self.kind is ControllerKind.MIXED_LINEAR:
            if self.eps is None or not (0.0 < self.eps < 1.0):
                raise ValueError(f"mixed-linear feedback needs eps in (0, 1), got {self.eps!r}")
        elif self.eps is not None:
            raise ValueError(f"{self.kind.value} takes no eps parameter")
        if self.kind is ControllerKind.CONSTANT:
            if self.U0 is None or not (np.isfinite(self.U0) and self.U0 > 0):
                raise ValueError(f"constant harvest needs U0 > 0, got {self.U0!r}")
        elif self.U0 is not None:
            raise ValueError(f"{self.kind.value} takes no U0 parameter")

    @classmethod
    def constant(cls, U0: float = 1.0):
        return cls(ControllerKind.CONSTANT, U0=float(U0))

    @classmethod
    def predator_linear(cls):
        return cls(ControllerKind.PREDATOR_LINEAR)

    @classmethod
    def mixed_linear(cls, eps: float):
        return cls(ControllerKind.MIXED_LINEAR, eps=float(eps))

    @classmethod
    def forwarding(cls):
        return cls(ControllerKind.FORWARDING)

    @classmethod
    def backstepping_conventional(cls):
        return cls(ControllerKind.BACKSTEPPING_CONVENTIONAL)

    @classmethod
    def backstepping_positive(cls):
        return cls(ControllerKind.BACKSTEPPING_POSITIVE)

    @classmethod
    def parse(cls, name: str, eps: float | None = None, U0: float | None = None):
        kind = ControllerKind(name.strip().lower().replace("_", "-"))
        if kind is ControllerKind.MIXED_LINEAR:
            return cls(kind, eps=eps)
        if kind is ControllerKind.CONSTANT:
            return cls(kind, U0=1.0 if U0 is None else U0)
        return cls(kind)

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def models(self) -> frozenset:
        """Models this law was designed for."""
        return _TARGETS[self.kind]

    @property
    def may_go_negative(self) -> bool:
        """False for laws that are positive on the whole open quadrant."""
        return self.kind in _SIGN_INDEFINITE

    def describe(self) -> dict:
        out = {"controller": self.name}
        if self.eps is not None:
            out["eps"] = self.eps
        if self.U0 is not None:
            out["U0"] = self.U0
        return out


def _control(spec: ControllerSpec, X, Y):
    k = spec.kind
    if k is ControllerKind.CONSTANT:
        return spec.U0 + 0.0 * (X + Y)
    if k is ControllerKind.PREDATOR_LINEAR:
        return 1.0 * Y + 0.0 * X
    if k is ControllerKind.MIXED_LINEAR:
        return 1.0 + spec.eps * (Y - 1.0) + 0.0 * X
    if k is ControllerKind.FORWARDING:
        return X + Y - X / Y
    if k is ControllerKind.BACKSTEPPING_CONVENTIONAL:
        return Y + (Y - X) / Y
    return Y * Y / X


def control(spec: ControllerSpec, s: PopulationState):
    """Harvest rate commanded by ``spec`` at state ``s``."""
    return _control(spec, s.X, s.Y)


def _negativity(spec: ControllerSpec, X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if spec.kind is ControllerKind.FORWARDING:
        # U = Y - X(1 - Y)/Y, positive whenever Y >= 1
        with np.errstate(divide="ignore"):
            return (Y < 1.0) & (X > Y * Y / (1.0 - Y))
    if spec.kind is ControllerKind.BACKSTEPPING_CONVENTIONAL:
        return X > (1.0 + Y) * Y
    return np.zeros(np.broadcast(X, Y).shape, dtype=bool)


def negativity_predicate(spec: ControllerSpec, s: PopulationState):
    """Analytic test for ``control(spec, s) < 0``.

    Laws that never go negative return ``False`` everywhere; check
    ``spec.may_go_negative`` to tell that case apart from a genuine
    negative answer.
    """
    out = _negativity(spec, s.X, s.Y)
    return bool(out) if out.ndim == 0 else out
