"""Lyapunov / control Lyapunov function catalog.

Scalar building blocks
----------------------
``psi(S) = S - 1 - ln S``         Volterra block, minimum 0 at ``S = 1``.
``phi_big(s) = e^s - 1 - s``      the same block in log coordinates.
``pi_fn(X, eps)``                 prey-only augmentation for simultaneous
                                  harvesting; its derivative is chosen so
                                  the ``(Y - 1)`` cross term cancels.

Candidates (``ClfId``)
----------------------
=================  =======================================================
V1_SF              psi(X) + psi(Y)                        (non-strict)
V_SF_STRICT        V1_SF + psi(1/X) + psi(Y/X)
V1_BOTH            psi(X) + (1+eps) psi(Y)                (non-strict)
V_BOTH_STRICT      V1_BOTH + pi(X) + psi(Y / X**alpha),   alpha = eps/(1+eps)
V_FORWARDING       X/Y - 1 - ln X + Y - 1
V_BACKSTEPPING     psi(1/X) + psi(Y/X)
=================  =======================================================

Values and gradients are closed form and vectorised over numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .controllers import ControllerKind, ControllerSpec, _control
from .dynamics import BacksteppingState, ModelId, PopulationState, _field

__all__ = [
    "ClfId",
    "Clf",
    "ClfEvaluation",
    "InputAffineDecomposition",
    "PairingError",
    "NoDecompositionError",
    "STRICT_IDS",
    "psi",
    "psi_prime",
    "phi_big",
    "pi_fn",
    "pi_prime",
    "value",
    "gradient",
    "evaluate",
    "lie_derivative",
    "closed_loop_lie_derivative",
    "closed_form_vdot",
    "backstepping_vdot_sinh",
    "input_affine_LG",
    "cross_term_residue",
    "designated_pairings",
    "check_pairing",
]


class PairingError(ValueError):
    """A CLF was combined with a model/controller it was not designed for."""


class NoDecompositionError(ValueError):
    """No input-affine split ``Vdot = L + G U`` is published for this CLF."""


class ClfId(enum.Enum):
    V1_SF = "V1_SF"
    V_SF_STRICT = "V_SF_STRICT"
    V1_BOTH = "V1_BOTH"
    V_BOTH_STRICT = "V_BOTH_STRICT"
    V_FORWARDING = "V_FORWARDING"
    V_BACKSTEPPING = "V_BACKSTEPPING"


_NEEDS_EPS = {ClfId.V1_BOTH, ClfId.V_BOTH_STRICT}
STRICT_IDS = frozenset(
    {ClfId.V_SF_STRICT, ClfId.V_BOTH_STRICT, ClfId.V_FORWARDING, ClfId.V_BACKSTEPPING}
)


@dataclass(frozen=True)
class Clf:
    """A catalog entry: an id plus ``eps`` for the simultaneous-harvest pair."""

    id: ClfId
    eps: float | None = None

    def __post_init__(self):
        if not isinstance(self.id, ClfId):
            object.__setattr__(self, "id", ClfId(self.id))
        if self.id in _NEEDS_EPS:
            if self.eps is None or not (0.0 < self.eps < 1.0):
                raise ValueError(f"{self.id.value} needs eps in (0, 1), got {self.eps!r}")
        elif self.eps is not None:
            raise ValueError(f"{self.id.value} takes no eps parameter")

    @classmethod
    def parse(cls, name: str, eps: float | None = None) -> Clf:
        cid = ClfId(name.strip().upper())
        return cls(cid, eps if cid in _NEEDS_EPS else None)

    @property
    def alpha(self) -> float:
        return self.eps / (1.0 + self.eps)

    @property
    def strict(self) -> bool:
        return self.id in STRICT_IDS

    @property
    def name(self) -> str:
        return self.id.value

    @property
    def label(self) -> str:
        """Name plus ``eps`` when present, e.g. ``V_BOTH_STRICT(eps=0.5)``."""
        return self.name if self.eps is None else f"{self.name}(eps={self.eps:g})"

    def describe(self) -> dict:
        out = {"clf": self.name}
        if self.eps is not None:
            out["eps"] = self.eps
        return out


class ClfEvaluation(NamedTuple):
    value: float | np.ndarray
    grad_X: float | np.ndarray
    grad_Y: float | np.ndarray


class InputAffineDecomposition(NamedTuple):
    L: float | np.ndarray
    G: float | np.ndarray

    def vdot(self, U):
        return self.L + self.G * U


# -- building blocks ---------------------------------------------------------


def psi(S):
    S = np.asarray(S, dtype=float)
    if np.any(~(S > 0)):
        raise ValueError("psi is defined for S > 0 only")
    out = S - 1.0 - np.log(S)
    return float(out) if out.ndim == 0 else out


def psi_prime(S):
    return 1.0 - 1.0 / S


def phi_big(s):
    """``e^s - 1 - s``, the integral of ``e^t - 1`` from 0 to ``s``."""
    return np.expm1(s) - s


def _check_pi_args(X, eps):
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    if np.any(~(np.asarray(X) > 0)):
        raise ValueError("pi_fn is defined for X > 0 only")


def _pi(X, eps):
    a = eps / (1.0 + eps)
    Xa = X**a
    return (X - 1.0 - (Xa - 1.0) / a) / Xa


def _pi_prime(X, eps):
    a = eps / (1.0 + eps)
    return (X - 1.0) / ((1.0 + eps) * X ** (1.0 + a))


def pi_fn(X, eps: float):
    """Closed-form prey augmentation ``X^-a [X - 1 - (X^a - 1)/a]``, ``a = eps/(1+eps)``.

    Non-negative with a unique zero at ``X = 1`` and radially unbounded on
    ``X > 0``, though not convex.
    """
    _check_pi_args(X, eps)
    return _pi(np.asarray(X, dtype=float), eps)


def pi_prime(X, eps: float):
    """``d pi_fn / dX = (X - 1) / ((1 + eps) X^(1 + a))``."""
    _check_pi_args(X, eps)
    return _pi_prime(np.asarray(X, dtype=float), eps)


# -- values and gradients ----------------------------------------------------


def _value(clf: Clf, X, Y):
    cid = clf.id
    if cid is ClfId.V1_SF:
        return (X - 1.0 - np.log(X)) + (Y - 1.0 - np.log(Y))
    if cid is ClfId.V_SF_STRICT:
        R = Y / X
        return (
            (X - 1.0 - np.log(X))
            + (Y - 1.0 - np.log(Y))
            + (1.0 / X - 1.0 + np.log(X))
            + (R - 1.0 - np.log(R))
        )
    if cid is ClfId.V1_BOTH:
        return (X - 1.0 - np.log(X)) + (1.0 + clf.eps) * (Y - 1.0 - np.log(Y))
    if cid is ClfId.V_BOTH_STRICT:
        R = Y / X**clf.alpha
        return (
            (X - 1.0 - np.log(X))
            + (1.0 + clf.eps) * (Y - 1.0 - np.log(Y))
            + _pi(X, clf.eps)
            + (R - 1.0 - np.log(R))
        )
    if cid is ClfId.V_FORWARDING:
        return X / Y - 1.0 - np.log(X) + Y - 1.0
    R = Y / X
    return (1.0 / X - 1.0 + np.log(X)) + (R - 1.0 - np.log(R))


def _gradient(clf: Clf, X, Y):
    cid = clf.id
    if cid is ClfId.V1_SF:
        return 1.0 - 1.0 / X, 1.0 - 1.0 / Y
    if cid is ClfId.V_SF_STRICT:
        return 1.0 + 1.0 / X - (1.0 + Y) / X**2, 1.0 + 1.0 / X - 2.0 / Y
    if cid is ClfId.V1_BOTH:
        return 1.0 - 1.0 / X, (1.0 + clf.eps) * (1.0 - 1.0 / Y)
    if cid is ClfId.V_BOTH_STRICT:
        a = clf.alpha
        R = Y / X**a
        gX = 1.0 - 1.0 / X + _pi_prime(X, clf.eps) - a * (R - 1.0) / X
        gY = (1.0 + clf.eps) * (1.0 - 1.0 / Y) + (R - 1.0) / Y
        return gX, gY
    if cid is ClfId.V_FORWARDING:
        return 1.0 / Y - 1.0 / X, 1.0 - X / Y**2
    return 2.0 / X - (1.0 + Y) / X**2, 1.0 / X - 1.0 / Y


def value(clf: Clf, s: PopulationState):
    """CLF value at ``s``; zero only at ``(1, 1)``."""
    return _value(clf, s.X, s.Y)


def gradient(clf: Clf, s: PopulationState):
    """Analytic ``(dV/dX, dV/dY)``."""
    return _gradient(clf, s.X, s.Y)


def evaluate(clf: Clf, s: PopulationState) -> ClfEvaluation:
    return ClfEvaluation(value(clf, s), *gradient(clf, s))


# -- pairings ----------------------------------------------------------------


def designated_pairings(clf: Clf) -> list[tuple[ModelId, ControllerSpec]]:
    """Closed loops whose decay the candidate is meant to certify."""
    cid = clf.id
    if cid in (ClfId.V1_SF, ClfId.V_SF_STRICT):
        return [(ModelId.PREDATOR_ONLY, ControllerSpec.predator_linear())]
    if cid in (ClfId.V1_BOTH, ClfId.V_BOTH_STRICT):
        return [(ModelId.SIMULTANEOUS, ControllerSpec.mixed_linear(clf.eps))]
    if cid is ClfId.V_FORWARDING:
        return [(ModelId.PREDATOR_ONLY, ControllerSpec.forwarding())]
    return [
        (ModelId.PREDATOR_ONLY, ControllerSpec.backstepping_positive()),
        (ModelId.PREDATOR_ONLY, ControllerSpec.backstepping_conventional()),
    ]


def _pairing_text(clf: Clf) -> str:
    return " or ".join(
        f"{ctrl.name}{'' if ctrl.eps is None else f'(eps={ctrl.eps})'} on {m.value}"
        for m, ctrl in designated_pairings(clf)
    )


def check_pairing(clf: Clf, model: ModelId, ctrl: ControllerSpec) -> None:
    """Raise :class:`PairingError` unless ``(model, ctrl)`` is designated for ``clf``."""
    model = ModelId.parse(model)
    if (model, ctrl) not in designated_pairings(clf):
        raise PairingError(
            f"{clf.name} is paired with {_pairing_text(clf)}; "
            f"got {ctrl.name} on {model.value}"
        )


# -- derivatives -------------------------------------------------------------


def lie_derivative(clf: Clf, model: ModelId, s: PopulationState, U):
    """``<grad V, f(s, U)>`` for an arbitrary harvest rate ``U``."""
    model = ModelId.parse(model)
    gX, gY = _gradient(clf, s.X, s.Y)
    fX, fY = _field(model, s.X, s.Y, U)
    return gX * fX + gY * fY


def closed_loop_lie_derivative(clf: Clf, model: ModelId, ctrl: ControllerSpec, s: PopulationState):
    return lie_derivative(clf, model, s, _control(ctrl, s.X, s.Y))


def closed_form_vdot(clf: Clf, s: PopulationState, ctrl: ControllerSpec | None = None):
    """Published closed-form time derivative along the designated closed loop.

    ``V_BACKSTEPPING`` has two closed loops; pass ``ctrl`` to pick the
    conventional law, otherwise the positive law ``U = Y^2/X`` is used.
    """
    X, Y = s.X, s.Y
    cid = clf.id
    if ctrl is not None and all(c != ctrl for _, c in designated_pairings(clf)):
        raise PairingError(f"{clf.name} is paired with {_pairing_text(clf)}; got {ctrl.name}")
    if cid is ClfId.V1_SF:
        return -((Y - 1.0) ** 2)
    if cid is ClfId.V_SF_STRICT:
        return -((X - 1.0) ** 2) / X - (Y - 1.0) ** 2
    if cid is ClfId.V1_BOTH:
        return -(1.0 + clf.eps) * clf.eps * (Y - 1.0) ** 2
    if cid is ClfId.V_BOTH_STRICT:
        Xa = X**clf.alpha
        return -(X - 1.0) * (Xa - 1.0) / Xa - (1.0 + clf.eps) * clf.eps * (Y - 1.0) ** 2
    if cid is ClfId.V_FORWARDING:
        r = X / Y
        return -0.5 * ((r - 1.0) ** 2 + (Y - 1.0) ** 2 + (r - Y) ** 2)
    if ctrl is not None and ctrl.kind is ControllerKind.BACKSTEPPING_CONVENTIONAL:
        return -((X - 1.0) ** 2) / X - (Y - X) ** 2 / (X * Y)
    return -((X - 1.0) ** 2) / X - (Y - X) ** 2 / X * (Y / X)


def backstepping_vdot_sinh(bs: BacksteppingState):
    """``-4[sinh^2(x/2) + e^(y+z) sinh^2(z/2)]`` with ``y = x + z``."""
    x, z = bs.x, bs.z
    return -4.0 * (np.sinh(x / 2.0) ** 2 + np.exp(x + 2.0 * z) * np.sinh(z / 2.0) ** 2)


def input_affine_LG(clf: Clf, s: PopulationState) -> InputAffineDecomposition:
    """Split of the predator-only open-loop derivative into ``L + G U``."""
    X, Y = s.X, s.Y
    if clf.id is ClfId.V_FORWARDING:
        L = -(X**2) / Y + X / Y - X + Y - 1.0 + X * Y
        G = X / Y - Y
        return InputAffineDecomposition(L, G)
    if clf.id is ClfId.V_BACKSTEPPING:
        L = (-((X - 1.0) ** 2) + Y * (Y - X)) / X
        G = (X - Y) / X
        return InputAffineDecomposition(L, G)
    raise NoDecompositionError(f"no input-affine decomposition published for {clf.name}")


def cross_term_residue(eps: float, s: PopulationState):
    """Mismatch between the derivative of the strictifying term and its target.

    The added term is ``pi(X) + psi(Y / X^a)``.  Along the simultaneous-harvest
    closed loop its derivative should be ``-(X - 1)(X^a - 1)/X^a`` exactly,
    with every ``(Y - 1)``-dependent contribution cancelled by ``pi``.
    Returns ``(residue, scale)``; ``scale`` is the magnitude of the summands,
    for relative comparisons.
    """
    a = eps / (1.0 + eps)
    X, Y = s.X, s.Y
    R = Y / X**a
    gX = _pi_prime(X, eps) - a * (R - 1.0) / X
    gY = (R - 1.0) / Y
    U = _control(ControllerSpec.mixed_linear(eps), X, Y)
    fX, fY = _field(ModelId.SIMULTANEOUS, X, Y, U)
    lie = gX * fX + gY * fY
    target = -(X - 1.0) * (X**a - 1.0) / X**a
    return lie - target, np.abs(gX * fX) + np.abs(gY * fY) + np.abs(target)
