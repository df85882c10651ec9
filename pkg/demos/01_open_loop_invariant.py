"""Open loop with constant harvest U = 1.

Orbits circle the equilibrium (1, 1) forever: X + Y - ln(XY) is conserved,
so nothing converges.  This script integrates two orbits, reports the drift
of the conserved quantity and the time of first return.
"""
from predprey import ControllerSpec, ModelId, PopulationState
from predprey.simulator import IntegratorConfig, integrate, invariant_drift, orbit_recurrence

cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, t_end=100.0, samples=2001)

for X0, Y0 in [(2.0, 1.0), (0.5, 3.0)]:
    tr = integrate(ModelId.PREDATOR_ONLY, ControllerSpec.constant(1.0), PopulationState(X0, Y0), cfg)
    t_ret, dist = orbit_recurrence(tr)
    print(f"start ({X0}, {Y0}):")
    print(f"  invariant drift over t in [0, 100]  {invariant_drift(tr):.2e}")
    print(f"  first return at t = {t_ret:.4f}, distance {dist:.1e}")
    print(f"  range of X along the orbit          [{tr.X.min():.3f}, {tr.X.max():.3f}]")
