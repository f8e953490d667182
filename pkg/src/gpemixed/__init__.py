"""Mixed RT0/P0 finite elements for Gross-Pitaevskii ground states.

Solves the nonlinear ground-state eigenvalue problem on uniformly refined
triangulations of a square, and brackets the exact ground-state energy:
a guaranteed, asymptotically exact lower bound from post-processing the
mixed discrete energy, and an upper bound from a conforming P1 minimizer.
"""

from .errors import (
    AlignmentError,
    AssemblyError,
    ConfigurationError,
    DiagonalSingularityError,
    GpeError,
    LineageError,
    NonConvergenceError,
    NotSpdError,
    SolverError,
    StagnationError,
)
from .fem import (
    AssembledOperators,
    MixedState,
    assemble,
    discrete_gradient,
    energy,
    l2_project_potential,
    l4_norm4,
    rt0_l2_project,
)
from .mesh import TriMesh, friedrichs_keller, mesh_size, red_refine
from .p1 import P1Operators, p1_assemble, p1_ground_state
from .potentials import PotentialSpec, constant, custom_grid, disorder, disorder_field, harmonic
from .solver import SolveReport, SolverConfig, ground_state, lower_bound, rayleigh
from .study import ConvergenceRecord, ExperimentConfig, run_convergence, run_lowerbound, run_solve
from .transfer import error_vs_reference, prolong_p0, prolong_p1, prolong_rt0

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "AssembledOperators",
    "AssemblyError",
    "ConfigurationError",
    "ConvergenceRecord",
    "DiagonalSingularityError",
    "ExperimentConfig",
    "GpeError",
    "LineageError",
    "MixedState",
    "NonConvergenceError",
    "NotSpdError",
    "P1Operators",
    "PotentialSpec",
    "SolveReport",
    "SolverConfig",
    "SolverError",
    "StagnationError",
    "TriMesh",
    "assemble",
    "constant",
    "custom_grid",
    "discrete_gradient",
    "disorder",
    "disorder_field",
    "energy",
    "error_vs_reference",
    "friedrichs_keller",
    "ground_state",
    "harmonic",
    "l2_project_potential",
    "l4_norm4",
    "lower_bound",
    "mesh_size",
    "p1_assemble",
    "p1_ground_state",
    "prolong_p0",
    "prolong_p1",
    "prolong_rt0",
    "rayleigh",
    "red_refine",
    "rt0_l2_project",
    "run_convergence",
    "run_lowerbound",
    "run_solve",
]
