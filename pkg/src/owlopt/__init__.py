"""Ordered weighted l1 (OWL) norms, proximity operators, projections,
atomic decompositions, and first-order solvers for OWL-regularized
least squares.
"""

from .norms import (WeightVector, OscarParams, SignedSortDecomposition,
                    as_weights, decompose, recompose, owl_norm, dual_norm,
                    oscar_weights, sort_invocations)
from .isotonic import (project_monotone_cone, project_monotone_cone_with_stats,
                       project_monotone_nonneg_cone)
from .proximal import (OwlBall, RootFindConfig, RootFindResult, RootFindError,
                       ProjectionInfo, prox_owl, eval_g, find_root,
                       project_owl_ball)
from .atoms import Atom, SignedAtom, base_atoms, enumerate_atoms, linear_oracle
from .solvers import (LinearMap, as_linear_map, RegressionProblem, Tikhonov,
                      Ivanov, SolverConfig, SolverTrace, SolverError,
                      PowerIterationResult, power_iteration, estimate_lipschitz,
                      duality_gap, cg_step_size, theorem2_bound, cg_solve,
                      sparsa_solve, fista_solve)
from .io import (read_matrix_csv, write_matrix_csv, load_vector, write_vector,
                 load_weights, write_weights, load_problem_csv)
from .bench import (SyntheticSpec, GroundTruth, block_signal, gen_design,
                    gen_ground_truth, gen_observations, standardize_columns,
                    mse, ProtocolResult, run_protocol, PROTOCOL_ALGOS)

__version__ = "0.1.0"

__all__ = [
    "WeightVector", "OscarParams", "SignedSortDecomposition", "as_weights",
    "decompose", "recompose", "owl_norm", "dual_norm", "oscar_weights",
    "sort_invocations",
    "project_monotone_cone", "project_monotone_cone_with_stats",
    "project_monotone_nonneg_cone",
    "OwlBall", "RootFindConfig", "RootFindResult", "RootFindError",
    "ProjectionInfo", "prox_owl", "eval_g", "find_root", "project_owl_ball",
    "Atom", "SignedAtom", "base_atoms", "enumerate_atoms", "linear_oracle",
    "LinearMap", "as_linear_map", "RegressionProblem", "Tikhonov", "Ivanov",
    "SolverConfig", "SolverTrace", "SolverError", "PowerIterationResult",
    "power_iteration", "estimate_lipschitz", "duality_gap", "cg_step_size",
    "theorem2_bound", "cg_solve", "sparsa_solve", "fista_solve",
    "read_matrix_csv", "write_matrix_csv", "load_vector", "write_vector",
    "load_weights", "write_weights", "load_problem_csv",
    "SyntheticSpec", "GroundTruth", "block_signal", "gen_design",
    "gen_ground_truth", "gen_observations", "standardize_columns",
    "mse", "ProtocolResult", "run_protocol", "PROTOCOL_ALGOS",
    "__version__",
]
