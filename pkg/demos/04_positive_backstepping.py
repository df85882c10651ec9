"""A positive stabilizer from backstepping.

U = Y^2/X is positive everywhere and makes Psi(1/X) + Psi(Y/X) decrease.
The conventional backstepping law Y + (Y - X)/Y also stabilizes but goes
negative when X > (1 + Y) Y.  Both are simulated from random starts; the
target-system form of the closed loop is integrated independently and
compared.
"""
import numpy as np

from predprey import Clf, ClfId, ControllerSpec, ModelId, PopulationState
from predprey.simulator import (
    IntegratorConfig,
    clf_monotonicity,
    convergence_time,
    integrate,
    random_initial_conditions,
    target_equivalence,
)

clf = Clf(ClfId.V_BACKSTEPPING)
cfg = IntegratorConfig(t_end=200.0, samples=2001)
starts = random_initial_conditions(10, seed=1)

for ctrl in (ControllerSpec.backstepping_positive(), ControllerSpec.backstepping_conventional()):
    times, min_u, mono = [], np.inf, True
    for s0 in starts:
        tr = integrate(ModelId.PREDATOR_ONLY, ctrl, s0, cfg)
        times.append(convergence_time(tr, 1e-6))
        min_u = min(min_u, tr.U.min())
        mono &= clf_monotonicity(tr, clf).passed
    print(f"{ctrl.name}: time to 1e-6 ball {min(times):.1f} .. {max(times):.1f}, "
          f"smallest input {min_u:+.3f}, V monotone: {mono}")

for s0 in [(2.0, 0.5), (0.1, 8.0)]:
    print(target_equivalence(PopulationState(*s0)).summary())
