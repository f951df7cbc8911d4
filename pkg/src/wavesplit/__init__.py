"""Domain-splitting time integration for the first-order acoustic wave equation.

P1 finite elements with mass lumping; global leapfrog and Crank-Nicolson
integrators; a non-iterative overlapping domain-splitting stepper (leapfrog
interface prediction, per-subdomain Crank-Nicolson, nodal averaging); and an
experiment harness for stability, convergence, and decay studies.
"""

from .decomposition import AveragingPlan, Decomposition, DecompositionError, \
    apply_averaging, build_averaging_plan, grow_overlap, local_overlap_count, \
    partition_blocks, restrict_to_subdomain
from .fem import AssemblyError, DiscreteOperators, State, apply_Lh, \
    assemble_lumped_mass, assemble_operators, assemble_stiffness, b_norm, \
    discrete_norms, energy_norm, error_vs_exact, interpolate_nodal, \
    operator_norm_estimate
from .harness import BracketError, ConfigError, ExperimentConfig, ResultRow, \
    load_config, read_csv, run_cfl_scan, run_convergence, run_decay_experiment, \
    run_experiment, run_topology_sweep, write_csv
from .integrators import IntegrationResult, SolverConfig, StepContext, \
    SubdomainSystem, apply_one_step_operator, cn_step, ds_step, integrate, \
    leapfrog_step, predict_interface_values, prepare_global_system, \
    prepare_subdomain_system, prepare_subdomain_systems, stability_bounds, \
    subdomain_cn_step
from .linalg import SolverError, cg_solve, make_csr, spmv, vdot
from .mesh import MeshError, NodeAdjacency, SimplicialMesh, build_adjacency, \
    build_interval_mesh, build_unit_square_mesh, dump_mesh
from .problems import DirichletWave1D, ProblemSpec, mu, mu_prime, mu_second, \
    problem_1d, problem_2d

__version__ = "0.1.0"
