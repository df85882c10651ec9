"""Grid scans, ray probes and region maps that check the catalog numerically.

Every scan reduces to a *margin* per sample point, positive where the
property holds; the report keeps the minimum and the point attaining it.
These are sampled checks, not proofs: nothing is claimed between grid
points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import clf as catalog
from .clf import Clf, ClfId, PairingError
from .controllers import ControllerSpec, _control, _negativity
from .dynamics import (
    BacksteppingState,
    ModelId,
    PopulationState,
    _field,
    coordinate_maps,
    target_system_field,
)

__all__ = [
    "DomainGrid",
    "VerificationReport",
    "RegionMap",
    "scan_positive_definite",
    "scan_vdot_negative",
    "scan_vdot_nonpositive",
    "nonstrict_witness",
    "classify_regions",
    "ray_unboundedness_probe",
    "uniform_rays",
    "consistency_sweep",
    "psi_integral",
    "pi_integral",
    "pi_integral_unit_weight",
    "EXCLUSION_RADIUS",
]

EXCLUSION_RADIUS = 1e-3


@dataclass(frozen=True)
class DomainGrid:
    """Log-spaced square grid ``X, Y in [e^-a, e^a]`` with ``n`` nodes per axis."""

    a: float = 3.0
    n: int = 200

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("grid log bound a must be positive")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("grid needs at least 2 points per axis")

    @property
    def axis(self) -> np.ndarray:
        return np.exp(np.linspace(-self.a, self.a, int(self.n)))

    @property
    def size(self) -> int:
        return int(self.n) ** 2

    def mesh(self):
        """``(X, Y)`` arrays of shape ``(n, n)``, ``Y`` varying along rows."""
        return np.meshgrid(self.axis, self.axis, indexing="xy")

    def points(self) -> PopulationState:
        X, Y = self.mesh()
        return PopulationState(X.ravel(), Y.ravel())

    def cross(self) -> PopulationState:
        """The lines ``X = 1`` and ``Y = 1`` sampled at the axis nodes."""
        ax = self.axis
        one = np.ones_like(ax)
        return PopulationState(np.concatenate([ax, one]), np.concatenate([one, ax]))

    def scan_points(self, include_cross: bool = True) -> PopulationState:
        """Grid points, plus the cross through ``(1, 1)`` when requested.

        Semidefinite derivatives typically vanish on ``Y = 1``, which an
        even-sized log grid never hits exactly; the cross guarantees those
        lines are sampled.
        """
        pts = self.points()
        if not include_cross:
            return pts
        c = self.cross()
        return PopulationState(np.concatenate([pts.X, c.X]), np.concatenate([pts.Y, c.Y]))

    def describe(self) -> dict:
        return {"grid_a": self.a, "grid_n": int(self.n), "spacing": "log"}


@dataclass
class VerificationReport:
    """Outcome of one check.

    ``margin`` is the worst (smallest) per-point margin; the check passes
    iff it is positive.  ``worst_point`` is where it was attained.
    """

    check: str
    passed: bool
    worst_point: tuple[float, float] | None
    margin: float
    points: int
    exclusion_radius: float | None = None
    params: dict = field(default_factory=dict)
    subreports: list[VerificationReport] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = {
            "check": self.check,
            "verdict": self.verdict,
            "worst_point": None if self.worst_point is None else list(self.worst_point),
            "margin": self.margin,
            "points": self.points,
            "params": dict(self.params),
        }
        if self.exclusion_radius is not None:
            out["params"]["exclusion_radius"] = self.exclusion_radius
        if self.subreports:
            out["subreports"] = [r.to_dict() for r in self.subreports]
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def summary(self) -> str:
        where = "" if self.worst_point is None else " at (%.6g, %.6g)" % self.worst_point
        return f"{self.check}: {self.verdict} (margin {self.margin:.3e}{where}, {self.points} points)"


def _report(check, margins, s: PopulationState, mask=None, **kw) -> VerificationReport:
    margins = np.asarray(margins, dtype=float).ravel()
    X = np.broadcast_to(s.X, margins.shape)
    Y = np.broadcast_to(s.Y, margins.shape)
    if mask is not None:
        margins, X, Y = margins[mask], X[mask], Y[mask]
    if margins.size == 0:
        return VerificationReport(check, True, None, float("inf"), 0, **kw)
    # NaN counts as a violation
    bad = np.isnan(margins)
    if bad.any():
        i = int(np.argmax(bad))
        margin = float("nan")
    else:
        i = int(np.argmin(margins))
        margin = float(margins[i])
    passed = bool(not bad.any() and margin > 0)
    return VerificationReport(
        check, passed, (float(X[i]), float(Y[i])), margin, int(margins.size), **kw
    )


def _outside_ball(s: PopulationState, radius: float):
    return np.hypot(s.X - 1.0, s.Y - 1.0) >= radius


def scan_positive_definite(
    clf: Clf,
    grid: DomainGrid,
    exclusion_radius: float = EXCLUSION_RADIUS,
    value_fn=None,
) -> VerificationReport:
    """Check ``V > 0`` away from the equilibrium and ``V(1, 1) ~ 0``.

    ``value_fn(X, Y)`` substitutes an arbitrary candidate for the catalog
    value, e.g. to demonstrate a failing candidate.
    """
    if value_fn is None:
        value_fn = lambda X, Y: catalog._value(clf, X, Y)  # noqa: E731
    s = grid.scan_points()
    keep = _outside_ball(s, exclusion_radius)
    s = PopulationState(s.X[keep], s.Y[keep])
    at_eq = float(np.asarray(value_fn(np.array([1.0]), np.array([1.0]))).ravel()[0])
    params = {**clf.describe(), **grid.describe(), "value_at_equilibrium": at_eq}
    rep = _report(
        f"positive_definite[{clf.label}]", value_fn(s.X, s.Y), s,
        exclusion_radius=exclusion_radius, params=params,
    )
    if not abs(at_eq) < 1e-12:
        rep.passed = False
        rep.worst_point = (1.0, 1.0)
        rep.margin = min(rep.margin, -abs(at_eq))
    return rep


def _lie_scan(clf, model, ctrl, grid, exclusion_radius, strict):
    model = ModelId.parse(model)
    catalog.check_pairing(clf, model, ctrl)
    s = grid.scan_points()
    keep = _outside_ball(s, exclusion_radius)
    s = PopulationState(s.X[keep], s.Y[keep])
    vdot = catalog.closed_loop_lie_derivative(clf, model, ctrl, s)
    kind = "vdot_negative" if strict else "vdot_nonpositive"
    # semidefinite check tolerates rounding-level positives
    margins = -vdot if strict else 1e-12 - vdot
    params = {**clf.describe(), **ctrl.describe(), "model": model.value, **grid.describe()}
    return _report(
        f"{kind}[{clf.label}|{ctrl.name}]", margins, s,
        exclusion_radius=exclusion_radius, params=params,
    )


def scan_vdot_negative(
    clf: Clf,
    model: ModelId,
    ctrl: ControllerSpec,
    grid: DomainGrid,
    exclusion_radius: float = EXCLUSION_RADIUS,
) -> VerificationReport:
    """Check that the closed-loop derivative is strictly negative off the ball."""
    return _lie_scan(clf, model, ctrl, grid, exclusion_radius, strict=True)


def scan_vdot_nonpositive(clf, model, ctrl, grid, exclusion_radius=EXCLUSION_RADIUS):
    """Semidefinite variant: ``Vdot <= 1e-12`` everywhere off the ball."""
    return _lie_scan(clf, model, ctrl, grid, exclusion_radius, strict=False)


_PREFERRED_WITNESS = {ClfId.V1_SF: (2.0, 1.0), ClfId.V1_BOTH: (3.0, 1.0)}


def nonstrict_witness(clf: Clf, model: ModelId, ctrl: ControllerSpec) -> PopulationState:
    """A state far from equilibrium where the closed-loop derivative vanishes."""
    if clf.strict:
        raise ValueError(f"{clf.name} is strict: no witness exists")
    catalog.check_pairing(clf, model, ctrl)
    candidates = [_PREFERRED_WITNESS[clf.id]] + [(X, 1.0) for X in (0.25, 5.0, 10.0)]
    for X, Y in candidates:
        s = PopulationState(X, Y)
        vdot = catalog.closed_loop_lie_derivative(clf, model, ctrl, s)
        if abs(vdot) < 1e-12 and s.distance_to_equilibrium() > 0.5:
            return s
    raise RuntimeError(f"no witness found for {clf.name}")  # pragma: no cover


@dataclass(frozen=True)
class RegionMap:
    """Per-point labels on a grid.

    ``u_negative``: the feedback is negative.  ``clf_failure``: both
    ``L > 0`` and ``G > 0``, so no positive input makes ``Vdot`` negative.
    Boolean arrays have the grid's ``(n, n)`` shape.
    """

    grid: DomainGrid
    controller: ControllerSpec
    clf: Clf
    X: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    L: np.ndarray
    G: np.ndarray
    u_negative: np.ndarray
    clf_failure: np.ndarray

    def labels_at(self, X: float, Y: float) -> set[str]:
        """Labels of a state, recomputed from the state alone."""
        U = _control(self.controller, X, Y)
        dec = catalog.input_affine_LG(self.clf, PopulationState(X, Y))
        out = set()
        if U < 0:
            out.add("U_NEGATIVE")
        if dec.L > 0 and dec.G > 0:
            out.add("CLF_FAILURE")
        return out or {"NONE"}

    def counts(self) -> dict:
        return {
            "points": int(self.u_negative.size),
            "U_NEGATIVE": int(self.u_negative.sum()),
            "CLF_FAILURE": int(self.clf_failure.sum()),
            "NONE": int((~self.u_negative & ~self.clf_failure).sum()),
        }


def classify_regions(grid: DomainGrid, ctrl: ControllerSpec, clf: Clf) -> RegionMap:
    X, Y = grid.mesh()
    s = PopulationState(X, Y)
    L, G = catalog.input_affine_LG(clf, s)
    U = _control(ctrl, X, Y)
    return RegionMap(grid, ctrl, clf, X, Y, U, L, G, U < 0, (L > 0) & (G > 0))


def uniform_rays(count: int = 16) -> np.ndarray:
    """Unit directions in log space, evenly spaced in angle."""
    th = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(th), np.sin(th)])


def ray_unboundedness_probe(
    clf: Clf,
    rays=None,
    steps: int = 60,
    reach: float = 30.0,
    growth_threshold: float | None = None,
    value_fn=None,
) -> VerificationReport:
    """Walk out from ``(1, 1)`` along log-space rays and check that ``V`` grows.

    A ray passes when ``V`` increases strictly from step to step and ends
    above ``growth_threshold`` (default ``reach / 2``).  Logarithmic
    directions only reach about ``reach`` at the last step, so the default
    threshold is set relative to ``reach``.
    """
    if rays is None:
        rays = uniform_rays(16)
    rays = np.atleast_2d(np.asarray(rays, dtype=float))
    rays = rays / np.linalg.norm(rays, axis=1, keepdims=True)
    if growth_threshold is None:
        growth_threshold = reach / 2.0
    if value_fn is None:
        value_fn = lambda X, Y: catalog._value(clf, X, Y)  # noqa: E731
    r = reach * np.arange(1, steps + 1) / steps
    margin, point = np.inf, None
    for d in rays:
        X = np.exp(r * d[0])
        Y = np.exp(r * d[1])
        with np.errstate(over="ignore", invalid="ignore"):
            V = np.asarray(value_fn(X, Y), dtype=float)
            # relative step-to-step increase; must stay positive
            rel = np.diff(V) / np.maximum(np.abs(V[1:]), 1.0)
        # per-step margins: increments, then the final growth requirement
        m = np.append(rel, V[-1] - growth_threshold)
        k = int(np.argmax(np.isnan(m))) if np.isnan(m).any() else int(np.argmin(m))
        j = min(k + 1, steps - 1)
        if np.isnan(m[k]):
            margin, point = float("nan"), (float(X[j]), float(Y[j]))
            break
        if m[k] < margin:
            margin, point = float(m[k]), (float(X[j]), float(Y[j]))
    passed = bool(margin > 0)
    return VerificationReport(
        f"radial_growth[{clf.label}]", passed, point, float(margin), int(len(rays) * steps),
        params={**clf.describe(), "rays": int(len(rays)), "steps": steps, "reach": reach,
                "growth_threshold": growth_threshold},
    )


# -- quadrature oracles ------------------------------------------------------


def psi_integral(S: float) -> float:
    """``(S-1)^2 * int_0^1 (1-t) / (1 + t(S-1))^2 dt``, by adaptive quadrature."""
    I, _ = quad(lambda t: (1.0 - t) / (1.0 + t * (S - 1.0)) ** 2, 0.0, 1.0,
                epsabs=1e-14, epsrel=1e-13, limit=200)
    return (S - 1.0) ** 2 * I


def pi_integral(X: float, eps: float) -> float:
    """``pi_fn`` rebuilt from its derivative by quadrature.

    ``pi(X) = int_1^X pi'(s) ds`` with ``s = 1 + t(X-1)`` gives
    ``(X-1)^2/(1+eps) * int_0^1 t / (1 + t(X-1))^((1+2eps)/(1+eps)) dt``.
    """
    p = (1.0 + 2.0 * eps) / (1.0 + eps)
    I, _ = quad(lambda t: t / (1.0 + t * (X - 1.0)) ** p, 0.0, 1.0,
                epsabs=1e-14, epsrel=1e-13, limit=200)
    return (X - 1.0) ** 2 * I / (1.0 + eps)


def pi_integral_unit_weight(X: float, eps: float) -> float:
    """Variant with weight ``(1-t)`` and no ``1/(1+eps)`` factor.

    It does NOT equal ``pi_fn`` (0.3567 vs 0.1748 at ``X = 2, eps = 0.5``);
    kept so the mismatch stays measurable.
    """
    p = (1.0 + 2.0 * eps) / (1.0 + eps)
    I, _ = quad(lambda t: (1.0 - t) / (1.0 + t * (X - 1.0)) ** p, 0.0, 1.0,
                epsabs=1e-14, epsrel=1e-13, limit=200)
    return (X - 1.0) ** 2 * I


# -- consistency sweep -------------------------------------------------------

SWEEP_EPS = (0.1, 0.5, 0.9)
SWEEP_INPUTS = (-1.0, 0.0, 0.5, 1.0, 2.0)
QUADRATURE_ABSCISSAE = np.exp(np.linspace(-3.0, 3.0, 50))


def all_clfs(eps_values=SWEEP_EPS) -> list[Clf]:
    out = []
    for cid in ClfId:
        if cid in (ClfId.V1_BOTH, ClfId.V_BOTH_STRICT):
            out.extend(Clf(cid, e) for e in eps_values)
        else:
            out.append(Clf(cid))
    return out


def _rel_margin(err, scale, rtol):
    """``rtol * scale - |err|``, positive when within tolerance."""
    return rtol * np.abs(scale) - np.abs(err)


def check_gradients(grid: DomainGrid, h: float = 1e-6, rtol: float = 1e-6) -> VerificationReport:
    """Analytic gradients against centred differences, relative in the 2-norm."""
    s = grid.points()
    subs = []
    for c in all_clfs():
        gX, gY = catalog._gradient(c, s.X, s.Y)
        fX = (catalog._value(c, s.X + h, s.Y) - catalog._value(c, s.X - h, s.Y)) / (2 * h)
        fY = (catalog._value(c, s.X, s.Y + h) - catalog._value(c, s.X, s.Y - h)) / (2 * h)
        err = np.hypot(fX - gX, fY - gY)
        mask = _outside_ball(s, EXCLUSION_RADIUS)
        subs.append(_report(f"gradient_fd[{c.label}]",
                            _rel_margin(err, np.hypot(gX, gY), rtol), s, mask=mask,
                            params={**c.describe(), "h": h, "rtol": rtol}))
    return _aggregate("gradient_vs_finite_difference", subs, s)


def check_closed_forms(grid: DomainGrid, rtol: float = 1e-10) -> VerificationReport:
    s = grid.points()
    mask = _outside_ball(s, EXCLUSION_RADIUS)
    subs = []
    for c in all_clfs():
        for model, ctrl in catalog.designated_pairings(c):
            lie = catalog.closed_loop_lie_derivative(c, model, ctrl, s)
            cf = catalog.closed_form_vdot(c, s, ctrl)
            subs.append(_report(f"closed_form_vdot[{c.label}|{ctrl.name}]",
                                _rel_margin(lie - cf, cf, rtol), s, mask=mask,
                                params={**c.describe(), **ctrl.describe(), "rtol": rtol}))
    return _aggregate("closed_form_vs_lie_derivative", subs, s)


def check_quadrature(atol: float = 1e-8, pi_impl=None) -> VerificationReport:
    """Closed forms of ``psi`` and ``pi`` against adaptive quadrature."""
    if pi_impl is None:
        pi_impl = catalog.pi_fn
    S = QUADRATURE_ABSCISSAE
    pts = PopulationState(S, np.ones_like(S))
    psi_err = np.array([catalog.psi(v) - psi_integral(v) for v in S])
    subs = [_report("quadrature[psi]", atol - np.abs(psi_err), pts, params={"atol": atol})]
    for e in SWEEP_EPS:
        err = np.array([pi_impl(v, e) - pi_integral(v, e) for v in S])
        subs.append(_report(f"quadrature[pi,eps={e}]", atol - np.abs(err), pts,
                            params={"atol": atol, "eps": e}))
    return _aggregate("closed_form_vs_quadrature", subs, pts)


def check_decompositions(grid: DomainGrid, rtol: float = 1e-10) -> VerificationReport:
    s = grid.points()
    subs = []
    for c in (Clf(ClfId.V_FORWARDING), Clf(ClfId.V_BACKSTEPPING)):
        dec = catalog.input_affine_LG(c, s)
        gX, gY = catalog._gradient(c, s.X, s.Y)
        for U in SWEEP_INPUTS:
            fX, fY = _field(ModelId.PREDATOR_ONLY, s.X, s.Y, U)
            lie = gX * fX + gY * fY
            # scale by the summand magnitudes: L + G U can cancel to ~0
            scale = np.abs(dec.L) + np.abs(dec.G * U) + np.abs(gX * fX) + np.abs(gY * fY)
            subs.append(_report(f"input_affine[{c.name},U={U}]",
                                _rel_margin(dec.vdot(U) - lie, scale, rtol), s,
                                params={**c.describe(), "U": U, "rtol": rtol}))
    return _aggregate("input_affine_decomposition", subs, s)


def check_backstepping_dissipation(grid: DomainGrid) -> VerificationReport:
    """Where ``G > 0`` the drift ``L`` must be negative (no violations)."""
    s = grid.points()
    L, G = catalog.input_affine_LG(Clf(ClfId.V_BACKSTEPPING), s)
    mask = G > 0
    return _report("backstepping_G_pos_implies_L_neg", -L, s, mask=mask)


def check_sinh_form(grid: DomainGrid, rtol: float = 1e-10) -> VerificationReport:
    s = grid.points()
    _, _, bs = coordinate_maps(s)
    c = Clf(ClfId.V_BACKSTEPPING)
    a = catalog.closed_form_vdot(c, s)
    b = catalog.backstepping_vdot_sinh(bs)
    mask = _outside_ball(s, EXCLUSION_RADIUS)
    return _report("backstepping_sinh_form", _rel_margin(a - b, a, rtol), s, mask=mask)


def check_target_pullback(grid: DomainGrid, rtol: float = 1e-10) -> VerificationReport:
    """``(x, z)`` target field, mapped to ``(X, Y)`` by the chain rule, equals
    the predator-only closed loop under ``U = Y^2/X``."""
    s = grid.points()
    _, _, bs = coordinate_maps(s)
    dx, dz = target_system_field(bs)
    dX = s.X * dx
    dY = s.Y * (dx + dz)
    U = _control(ControllerSpec.backstepping_positive(), s.X, s.Y)
    fX, fY = _field(ModelId.PREDATOR_ONLY, s.X, s.Y, U)
    err = np.hypot(dX - fX, dY - fY)
    scale = s.X * (1.0 + s.Y) + s.Y * (s.X + U)
    return _report("target_system_pullback", _rel_margin(err, scale, rtol), s)


def check_cross_term(grid: DomainGrid, rtol: float = 1e-10) -> VerificationReport:
    s = grid.points()
    subs = []
    for e in SWEEP_EPS:
        res, scale = catalog.cross_term_residue(e, s)
        subs.append(_report(f"cross_term_cancellation[eps={e}]", _rel_margin(res, scale, rtol), s,
                            params={"eps": e, "rtol": rtol}))
    return _aggregate("cross_term_cancellation", subs, s)


def _aggregate(check, subs, s: PopulationState, **params) -> VerificationReport:
    worst = min(subs, key=lambda r: (not np.isnan(r.margin), r.margin))
    return VerificationReport(
        check, all(r.passed for r in subs), worst.worst_point, worst.margin,
        int(np.size(s.X)), params=params, subreports=subs,
    )


def consistency_sweep(grid: DomainGrid | None = None, pi_impl=None) -> VerificationReport:
    """Run every catalog consistency check on ``grid`` and aggregate.

    ``pi_impl`` replaces the closed-form ``pi_fn`` in the quadrature check
    only (for mutation testing).
    """
    if grid is None:
        grid = DomainGrid(3.0, 100)
    subs = [
        check_gradients(grid),
        check_closed_forms(grid),
        check_quadrature(pi_impl=pi_impl),
        check_decompositions(grid),
        check_backstepping_dissipation(grid),
        check_sinh_form(grid),
        check_target_pullback(grid),
        check_cross_term(grid),
    ]
    rep = _aggregate("consistency_sweep", subs, grid.points(), **grid.describe())
    rep.points = grid.size
    return rep
