"""Estimate relative Euclidean volumes of restricted behaviour sets inside
the bipartite nonsignaling polytope.

The pipeline: draw uniform samples from the nonsignaling polytope in minimal
coordinates (coordinate Gibbs chain), test each sample against a target set
(local polytope via LP, moment-matrix relaxations of the quantum / PPT /
maximally-entangled sets via SDP) by maximising the visibility at which the
sample mixed with white noise stays inside, and aggregate counts into
relative-volume estimates with confidence intervals.
"""

__version__ = "0.1.0"

from .errors import (
    BellvolError,
    DegenerateInterval,
    DomainError,
    Infeasible,
    SignalingInput,
    SolverFailure,
    TooManyVertices,
    UnsupportedLevel,
)
from .hierarchy import (
    MomentProblem,
    as_level,
    compile_problem,
    predicted_block_size,
    predicted_local_size,
)
from .local_set import visibility_to_local
from .membership import (
    BatteryResult,
    MembershipTester,
    Outcome,
    Target,
    estimated_cost,
    implies_membership,
    parse_target,
    test_battery,
    test_point,
)
from .polytope import (
    PolytopeH,
    box,
    ns_polytope,
    sample_uniform,
    standard_simplex,
)
from .scenario import (
    BellScenario,
    Correlation,
    FullDistribution,
    cg_from_full,
    deterministic_vertex_cg,
    euclidean_distance,
    full_from_cg,
    local_vertex_noise_distance,
    ns_extreme_point,
    ns_vertex_noise_distance,
    pr_box,
    white_noise,
)
from .sdp_io import read_problem, write_problem
from .volume import (
    NonlocalFraction,
    RvEstimate,
    VisibilityStats,
    convergence_series,
    estimate_rv,
    estimate_rv_all,
    naive_subcorrelation_bound,
    nonlocal_fraction,
    q_star_star,
    visibility_stats,
    wilson_interval,
    write_report_bundle,
)

__all__ = [
    "__version__",
    # errors
    "BellvolError",
    "DomainError",
    "UnsupportedLevel",
    "SignalingInput",
    "TooManyVertices",
    "DegenerateInterval",
    "Infeasible",
    "SolverFailure",
    # scenarios and behaviours
    "BellScenario",
    "Correlation",
    "FullDistribution",
    "white_noise",
    "pr_box",
    "full_from_cg",
    "cg_from_full",
    "deterministic_vertex_cg",
    "ns_extreme_point",
    "euclidean_distance",
    "local_vertex_noise_distance",
    "ns_vertex_noise_distance",
    # polytopes and sampling
    "PolytopeH",
    "ns_polytope",
    "box",
    "standard_simplex",
    "sample_uniform",
    # local membership
    "visibility_to_local",
    # moment-matrix relaxations
    "MomentProblem",
    "as_level",
    "compile_problem",
    "predicted_block_size",
    "predicted_local_size",
    "read_problem",
    "write_problem",
    # membership testing
    "Target",
    "parse_target",
    "implies_membership",
    "estimated_cost",
    "MembershipTester",
    "Outcome",
    "test_point",
    "BatteryResult",
    "test_battery",
    # volume statistics
    "RvEstimate",
    "estimate_rv",
    "estimate_rv_all",
    "NonlocalFraction",
    "nonlocal_fraction",
    "VisibilityStats",
    "visibility_stats",
    "convergence_series",
    "wilson_interval",
    "naive_subcorrelation_bound",
    "q_star_star",
    "write_report_bundle",
]
