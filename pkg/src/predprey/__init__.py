"""Strict control Lyapunov functions and feedback laws for predator-prey harvesting.

Modules
-------
dynamics     the two harvesting models and their coordinate systems
controllers  the six feedback laws
clf          Lyapunov building blocks and the CLF catalog
verifier     grid scans, ray probes, region maps, consistency sweep
simulator    log-coordinate closed-loop simulation
figures      figure data generation
cli          ``predprey`` command line
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    BacksteppingState,
    ForwardingState,
    LogState,
    ModelId,
    PopulationState,
    coordinate_maps,
    log_vector_field,
    open_loop_invariant,
    target_system_field,
    vector_field,
)
from .controllers import ControllerKind, ControllerSpec, control, negativity_predicate  # noqa: E402
from .clf import (  # noqa: E402
    Clf,
    ClfId,
    closed_form_vdot,
    gradient,
    input_affine_LG,
    phi_big,
    pi_fn,
    pi_prime,
    psi,
    value,
)
