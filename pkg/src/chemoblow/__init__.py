"""Radial simulator and verification harness for attraction-repulsion
chemotaxis with superlinear logistic degradation.

The package integrates the coupled parabolic-elliptic-elliptic system for
the cell density u and the two chemical signals v (attractant) and
w (repellent) on a ball, radially symmetric, up to (near) finite-time
blow-up.  Alongside the primal solver it carries an independent solver for
the cumulative-mass form of the same dynamics, the diagnostic functionals
(mass, L^inf, psi, phi, the five-term energy decomposition), and the
analytic lower bounds on the blow-up time.
"""

from .model import (
    ModelParams,
    InitialProfile,
    ParameterError,
    validate_params,
    make_profile,
    m_star,
    ball_volume,
    sphere_area,
)
from .grid import RadialGrid, build_grid, solve_elliptic, radial_gradient
from .solver import StepControl, SimState, RunResult, rhs, step, run
from .mass_solver import (
    MassState,
    cumulative_profile,
    density_from_cumulative,
    solve_signal_cumulative,
    solve_vw,
    mass_rhs,
    step_mass,
    run_mass,
)
from .functionals import (
    MomentConfig,
    DiagnosticsRecord,
    psi,
    phi,
    energy_decomposition,
    gn_ratio,
    check_mass_bound,
    phi_growth_report,
)
from .bounds import (
    GNConfig,
    BoundConstants,
    compute_bound_constants,
    lower_bound_integral,
    lower_bound_explicit,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "InitialProfile",
    "ParameterError",
    "validate_params",
    "make_profile",
    "m_star",
    "ball_volume",
    "sphere_area",
    "RadialGrid",
    "build_grid",
    "solve_elliptic",
    "radial_gradient",
    "StepControl",
    "SimState",
    "RunResult",
    "rhs",
    "step",
    "run",
    "MassState",
    "cumulative_profile",
    "density_from_cumulative",
    "solve_signal_cumulative",
    "solve_vw",
    "mass_rhs",
    "step_mass",
    "run_mass",
    "MomentConfig",
    "DiagnosticsRecord",
    "psi",
    "phi",
    "energy_decomposition",
    "gn_ratio",
    "check_mass_bound",
    "phi_growth_report",
    "GNConfig",
    "BoundConstants",
    "compute_bound_constants",
    "lower_bound_integral",
    "lower_bound_explicit",
]
