"""recotree: recoverable and robust spanning trees on multigraphs.

Core problem: pick a first-stage spanning tree ``X`` and a second-stage
tree ``Y`` sharing at least ``n - 1 - k`` edges, minimising the sum of
first-stage costs on ``X`` and second-stage costs on ``Y``.  The package
provides an exact primal-dual solver for that problem, an incremental
variant for a fixed first tree, robust extensions where the second-stage
costs are uncertain (interval and budgeted models, with certified
approximation ratios), exhaustive oracles for validation, a command-line
interface, and a benchmark harness.  Hot graph kernels run on a compiled
backend when available, with a pure-Python fallback selected at import.
"""

from .bench import BenchRow, run_benchmark
from .errors import (
    GraphConnectivityError,
    IllegalMoveError,
    InstanceFormatError,
    InvalidParameterError,
    InvalidTreeError,
    OracleCapExceeded,
    RecotreeError,
    SolverInvariantError,
    UnboundedProgramError,
)
from .graph import (
    EdgePartition,
    Graph,
    Tree,
    UnionFind,
    apply_move,
    is_spanning_tree,
    partition_of,
    tree_path,
)
from .incsolver import IncSolution, solve_incremental
from .instances import (
    MODEL_CONTINUOUS,
    MODEL_DISCRETE,
    MODEL_INTERVAL,
    MODELS,
    RobustInstance,
    generate_instance,
    instance_digest,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    parse_instance,
    save_instance,
    serialize_instance,
)
from .kernels import active_backend, available_backends, set_backend
from .mst import check_path_optimality, minimum_spanning_tree
from .oracle import (
    DEFAULT_CAPS,
    BruteRecResult,
    OracleCaps,
    adversary_value_cutting,
    adversary_value_full_lp,
    brute_force_recoverable,
    brute_force_robust,
    brute_force_robust_value,
    enumerate_spanning_trees,
    spanning_tree_count,
)
from .recsolver import (
    AdmissibleGraph,
    AugmentingPath,
    PairState,
    RecSolution,
    augment,
    build_admissible_graph,
    find_augmenting_path,
    initial_pair,
    next_dual_step,
    shift_duals,
    solve_recoverable,
    verify_pair_state,
)
from .robust import (
    ApproxCertificate,
    Evaluation,
    RobustSolution,
    approx_continuous_budget,
    approx_discrete_budget,
    robust_value,
    solve_interval,
    solve_robust,
    worst_case_fixed_tree,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleGraph",
    "ApproxCertificate",
    "AugmentingPath",
    "BenchRow",
    "BruteRecResult",
    "DEFAULT_CAPS",
    "EdgePartition",
    "Evaluation",
    "Graph",
    "GraphConnectivityError",
    "IllegalMoveError",
    "IncSolution",
    "InstanceFormatError",
    "InvalidParameterError",
    "InvalidTreeError",
    "MODELS",
    "MODEL_CONTINUOUS",
    "MODEL_DISCRETE",
    "MODEL_INTERVAL",
    "OracleCapExceeded",
    "OracleCaps",
    "PairState",
    "RecSolution",
    "RecotreeError",
    "RobustInstance",
    "RobustSolution",
    "SolverInvariantError",
    "Tree",
    "UnboundedProgramError",
    "UnionFind",
    "active_backend",
    "adversary_value_cutting",
    "adversary_value_full_lp",
    "apply_move",
    "approx_continuous_budget",
    "approx_discrete_budget",
    "augment",
    "available_backends",
    "brute_force_recoverable",
    "brute_force_robust",
    "brute_force_robust_value",
    "build_admissible_graph",
    "check_path_optimality",
    "enumerate_spanning_trees",
    "find_augmenting_path",
    "generate_instance",
    "initial_pair",
    "instance_digest",
    "instance_from_dict",
    "instance_to_dict",
    "is_spanning_tree",
    "load_instance",
    "minimum_spanning_tree",
    "next_dual_step",
    "parse_instance",
    "partition_of",
    "robust_value",
    "run_benchmark",
    "save_instance",
    "serialize_instance",
    "set_backend",
    "shift_duals",
    "solve_incremental",
    "solve_interval",
    "solve_recoverable",
    "solve_robust",
    "spanning_tree_count",
    "tree_path",
    "verify_pair_state",
    "worst_case_fixed_tree",
]
