"""Steady-state finite-volume WENO solver with fast sweeping on triangles."""
from .euler import (GAMMA, BoundaryRule, Case, GasParams, NonPhysicalStateError, get_case,
                    conservative_to_primitive, primitive_to_conservative, register_case)
from .mesh import BoundaryTag, Mesh, MeshError, load_mesh, read_mesh, refine_uniform, write_mesh
from .solver import (Discretization, IterationReport, SolverConfig, compute_dt, residue_resa,
                     run_to_convergence, step_fe_jacobi, step_rk3_jacobi, sweep_fe_gs)
from .stencil import RankDeficiencyError, build_operators, build_stencils, extend_with_ghosts
from .sweep import SweepOrderings, build_orderings
from .weno import WenoConfig, nonlinear_weights

__version__ = "0.1.0"
