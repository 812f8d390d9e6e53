"""replab: a desk-scale laboratory for the degenerate nonlocal flow

    u_t = u lap(u) + u * min(1/eps, dirichlet_energy(u)),   u|boundary = eps

on intervals and rectangles, together with the torsion-function oracle,
the mass-constrained Dirichlet-energy minimization, and diagnostics that
verify the expected long-time behaviour (mass and energy monotonicity,
the integral mass identity, and the initial-mass trichotomy).
"""

from .diagnostics import (MonotoneCheck, VerificationReport,
                          check_energy_monotone, check_mass_monotone,
                          classify_regime, energy_limit_gap,
                          mass_ode_residual, verify_series)
from .evolution import (BLOWUP, CONVERGED, DECAYED, RUNNING, T_END_REACHED,
                        EpsStudyRow, SimConfig, SimState, SimulationAbort,
                        TimeSeriesRecord, eps_refinement_study, nonlocal_rate,
                        propose_dt, run, step)
from .grid import (Field, Grid, build_grid, difference, dirichlet_energy,
                   h1_distance, integrate, l2_distance, laplacian,
                   phi_weighted_sup)
from .initdata import (H3Report, InitialDataError, ProfileSpec, make_initial,
                       regularize_initial)
from .poisson import SolverError, TorsionSolution, solve_torsion, stationary_limit
from .variational import (DivergenceError, IterationLimitError, MinimizeResult,
                          energy_of_member, minimize_dirichlet, stability_bound)

__version__ = "0.1.0"

__all__ = [
    "BLOWUP", "CONVERGED", "DECAYED", "RUNNING", "T_END_REACHED",
    "DivergenceError", "EpsStudyRow", "Field", "Grid", "H3Report",
    "InitialDataError", "IterationLimitError", "MinimizeResult",
    "MonotoneCheck", "ProfileSpec", "SimConfig", "SimState",
    "SimulationAbort", "SolverError", "TimeSeriesRecord", "TorsionSolution",
    "VerificationReport", "build_grid", "check_energy_monotone",
    "check_mass_monotone", "classify_regime", "difference",
    "dirichlet_energy", "energy_limit_gap", "energy_of_member",
    "eps_refinement_study", "h1_distance", "integrate", "l2_distance",
    "laplacian", "make_initial", "mass_ode_residual", "minimize_dirichlet",
    "nonlocal_rate", "phi_weighted_sup", "propose_dt", "regularize_initial",
    "run", "solve_torsion", "stability_bound", "stationary_limit", "step",
    "verify_series",
]
