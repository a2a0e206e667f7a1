"""Kinetic transport with independent speed-jump and direction-jump scattering.

Library layers, bottom to top:

* grids / kernels / moments -- velocity grids, von Mises transition kernels,
  the joint equilibrium, and all quadrature moments;
* operators -- matrix-free scattering operators, the pseudo-inverse on the
  zero-mass subspace, weighted norms, entropy reports, boundedness constant;
* homogeneous -- relaxation of a velocity density and its diagnostics;
* particles -- discrete-time and event-driven Monte Carlo of the underlying
  jump processes;
* kinetic -- position x velocity transport solver (Strang splitting);
* macro -- assembled drift-diffusion limits and a finite-volume stepper;
* config / experiments / cli -- run configurations, paper-test presets,
  output writing, command line.
"""

from .errors import (
    ConfigurationError,
    DegenerateWeightError,
    ModelAssemblyError,
    StabilityError,
)
from .grids import AngularGrid, SpatialGrid, SpeedGrid, build_grids
from .homogeneous import RelaxationTrajectory, exact_direction_marginal, relax
from .kernels import (
    KernelSet,
    derive_equilibrium,
    direction_kernel_vonmises,
    mean_speed_abs_cos,
    mean_speed_constant,
    mean_speed_piecewise,
    speed_kernel_vonmises,
)
from .moments import MomentSet, compute_moments
from .particles import (
    JumpStatistics,
    ParticleEnsemble,
    estimate_density,
    run_discrete,
    simulate_event_driven,
    step_discrete,
)
from .operators import (
    EntropyReport,
    collision,
    collision_bound_constant,
    direction_jump,
    distance_to_equilibrium_sq,
    entropy_report,
    invert_collision,
    marginal_direction_op,
    marginal_speed_op,
    marginals,
    mass,
    norm_dir_sq,
    norm_eq_sq,
    norm_speed_sq,
    speed_jump,
)

__all__ = [
    "AngularGrid",
    "ConfigurationError",
    "DegenerateWeightError",
    "EntropyReport",
    "JumpStatistics",
    "KernelSet",
    "ModelAssemblyError",
    "MomentSet",
    "ParticleEnsemble",
    "RelaxationTrajectory",
    "SpatialGrid",
    "SpeedGrid",
    "StabilityError",
    "build_grids",
    "collision",
    "collision_bound_constant",
    "compute_moments",
    "derive_equilibrium",
    "direction_jump",
    "direction_kernel_vonmises",
    "distance_to_equilibrium_sq",
    "entropy_report",
    "estimate_density",
    "exact_direction_marginal",
    "invert_collision",
    "marginal_direction_op",
    "marginal_speed_op",
    "marginals",
    "mass",
    "mean_speed_abs_cos",
    "mean_speed_constant",
    "mean_speed_piecewise",
    "norm_dir_sq",
    "norm_eq_sq",
    "norm_speed_sq",
    "relax",
    "run_discrete",
    "simulate_event_driven",
    "speed_jump",
    "speed_kernel_vonmises",
    "step_discrete",
]

__version__ = "0.1.0"
