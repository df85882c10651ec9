"""Where forwarding needs negative harvest.

The forwarding law U = X + Y - X/Y stabilizes the predator-only model but
goes negative when Y < 1 and X > Y^2/(1 - Y).  Its Lyapunov function splits
as Vdot = L + G U; where L > 0 and G > 0 no positive U can make Vdot
negative.  This script counts both regions and probes a few states.
"""
from predprey import Clf, ClfId, ControllerSpec, PopulationState, control, input_affine_LG
from predprey.verifier import DomainGrid, classify_regions

fwd = ControllerSpec.forwarding()
clf = Clf(ClfId.V_FORWARDING)
rm = classify_regions(DomainGrid(3.0, 200), fwd, clf)
print("labels on a 200 x 200 log grid over [e^-3, e^3]^2:", rm.counts())

for X, Y in [(0.5, 0.1), (4.0, 0.5), (1.0, 1.0), (0.2, 3.0)]:
    s = PopulationState(X, Y)
    L, G = input_affine_LG(clf, s)
    print(f"({X}, {Y}): U = {control(fwd, s):+.3f}  L = {L:+.3f}  G = {G:+.3f}  labels {sorted(rm.labels_at(X, Y))}")
