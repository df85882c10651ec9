"""Strict versus non-strict Lyapunov candidates.

The simple candidate psi(X) + psi(Y) only has a semidefinite derivative
under U = Y: it vanishes on the whole line Y = 1.  Adding psi(1/X) + psi(Y/X)
makes the derivative negative everywhere except at (1, 1).  Grid scans show
both facts, and a short simulation shows the strict candidate decaying.
"""
from predprey import Clf, ClfId, ControllerSpec, ModelId, PopulationState
from predprey.simulator import IntegratorConfig, clf_monotonicity, integrate
from predprey.verifier import DomainGrid, scan_positive_definite, scan_vdot_negative

grid = DomainGrid(3.0, 200)
ctrl = ControllerSpec.predator_linear()
model = ModelId.PREDATOR_ONLY

for cid in (ClfId.V1_SF, ClfId.V_SF_STRICT):
    clf = Clf(cid)
    print(scan_positive_definite(clf, grid).summary())
    print(scan_vdot_negative(clf, model, ctrl, grid).summary())

# the simultaneous-harvest pair behaves the same way
for eps in (0.1, 0.5, 0.9):
    rep = scan_vdot_negative(Clf(ClfId.V_BOTH_STRICT, eps), ModelId.SIMULTANEOUS,
                             ControllerSpec.mixed_linear(eps), grid)
    print(rep.summary())

strict = Clf(ClfId.V_SF_STRICT)
tr = integrate(model, ctrl, PopulationState(4.0, 0.3), IntegratorConfig(t_end=40.0), clfs=[strict])
V = tr.clf_values["V_SF_STRICT"]
print(f"\nV along U = Y from (4, 0.3): {V[0]:.3f} -> {V[len(V) // 4]:.3e} -> {V[-1]:.3e}")
print(clf_monotonicity(tr, strict).summary())
