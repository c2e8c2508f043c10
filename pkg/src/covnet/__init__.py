"""Network design with coverage costs: laminar and sunflower demand solvers."""

from .errors import (
    CovnetError,
    GraphError,
    InfeasibleError,
    InstanceError,
    InvalidSolutionError,
    InvariantViolation,
    OracleLimitError,
    ShapeError,
)
from .graph import (
    DemandShape,
    Graph,
    Group,
    Instance,
    RoutingSolution,
    classify_demands,
    laminar_cost,
    load_cost,
    mst,
    steiner_mst_heuristic,
    subdivide_edges,
)
from .laminar import LaminarCertificate, check_dual_feasibility, check_primal_feasibility, solve_laminar
from .oracle import OracleLimits, exact_coverage_optimum, exact_steiner_forest, exact_steiner_tree
from .spanner import build_group_spanner, certify_spanner, make_uniform
from .sunflower import solve_sunflower, sunflower_lower_bound

__version__ = "0.1.0"

__all__ = [
    "CovnetError",
    "DemandShape",
    "Graph",
    "GraphError",
    "Group",
    "InfeasibleError",
    "Instance",
    "InstanceError",
    "InvalidSolutionError",
    "InvariantViolation",
    "LaminarCertificate",
    "OracleLimitError",
    "OracleLimits",
    "RoutingSolution",
    "ShapeError",
    "build_group_spanner",
    "certify_spanner",
    "check_dual_feasibility",
    "check_primal_feasibility",
    "classify_demands",
    "exact_coverage_optimum",
    "exact_steiner_forest",
    "exact_steiner_tree",
    "laminar_cost",
    "load_cost",
    "make_uniform",
    "mst",
    "solve_laminar",
    "solve_sunflower",
    "steiner_mst_heuristic",
    "subdivide_edges",
    "sunflower_lower_bound",
]
