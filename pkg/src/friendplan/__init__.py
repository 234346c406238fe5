"""Invitation planning on social graphs.

Given an initiator, a friending target, and an invitation budget, build the
maximum-influence tree toward the target and pick the budget-constrained set
of intermediaries that maximizes the target's acceptance probability.
"""

from .arborescence import (
    Arborescence,
    SCopy,
    build_miia,
    dump_arborescence,
    max_influence_tree,
    subtree_counts,
)
from .errors import (
    FriendPlanError,
    GraphFormatError,
    GraphParameterError,
    InstanceTooLargeError,
    SamplingError,
    TargetInFriendSetError,
    TargetUnreachableError,
)
from .evaluate import (
    CounterexampleReport,
    McEstimate,
    ProbabilityReport,
    acceptance_probability,
    activation_probability,
    dag_acceptance,
    exact_ic_acceptance,
    mc_estimate,
    submodularity_counterexample,
)
from .graph import (
    SocialGraph,
    UniformWeightConfig,
    ZipfWeightConfig,
    dump_edge_list,
    generate_synthetic,
    generate_tree_graph,
    hop_distance,
    load_edge_list,
    loads_edge_list,
)
from .homophily import HomophilyModel, load_homophily
from .planners import (
    DpTables,
    InvitationPlan,
    PlanRequest,
    backtrack,
    plan_rg,
    plan_sita,
    plan_sitina,
)

__version__ = "0.1.0"

__all__ = [
    "Arborescence",
    "CounterexampleReport",
    "DpTables",
    "FriendPlanError",
    "GraphFormatError",
    "GraphParameterError",
    "HomophilyModel",
    "InstanceTooLargeError",
    "InvitationPlan",
    "McEstimate",
    "PlanRequest",
    "ProbabilityReport",
    "SCopy",
    "SamplingError",
    "SocialGraph",
    "TargetInFriendSetError",
    "TargetUnreachableError",
    "UniformWeightConfig",
    "ZipfWeightConfig",
    "acceptance_probability",
    "activation_probability",
    "backtrack",
    "build_miia",
    "dag_acceptance",
    "dump_arborescence",
    "dump_edge_list",
    "exact_ic_acceptance",
    "generate_synthetic",
    "generate_tree_graph",
    "hop_distance",
    "load_edge_list",
    "load_homophily",
    "loads_edge_list",
    "max_influence_tree",
    "mc_estimate",
    "plan_rg",
    "plan_sita",
    "plan_sitina",
    "submodularity_counterexample",
]
