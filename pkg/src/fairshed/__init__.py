"""Fair electricity distribution: who is connected when, under a hard supply cap."""

from .consensus import (
    ConsensusDivision,
    ConsensusNotFoundError,
    StructureError,
    consensus_division_lp,
    consensus_division_min_cuts,
    extract_consensus_from_egalitarian,
    reduce_consensus_to_electricity,
)
from .egalitarian import (
    FairnessReport,
    GFSInfeasibleError,
    SegmentAssignment,
    SetDistribution,
    egalitarian_additive,
    egalitarian_uniform,
    fairness_report,
    gfs_allocation,
    gfs_check,
    ifs_check,
    minimize_switches,
)
from .io import generate_instance, load_instance, load_schedule, save_instance, save_schedule
from .model import (
    Agent,
    Allocation,
    DomainError,
    FeasibilityReport,
    InfeasibleAllocationError,
    Instance,
    InstanceError,
    Metrics,
    PiecewiseConstantUtility,
    check_feasible,
    compute_metrics,
    normalize_utilities,
    utility_of,
)
from .packing import (
    FeasibleSet,
    PackingNotFoundError,
    QPacking,
    TooManyAgentsError,
    best_packing_ratio,
    bin_pack,
    enumerate_maximal_feasible_sets,
    q_times_bin_pack,
)
from .proportional import (
    CopiedCake,
    allocate_identical_additive,
    allocate_uniform_identical,
    connection_quota,
    even_paz,
)

__all__ = [
    "Agent",
    "allocate_identical_additive",
    "allocate_uniform_identical",
    "Allocation",
    "best_packing_ratio",
    "bin_pack",
    "check_feasible",
    "compute_metrics",
    "connection_quota",
    "consensus_division_lp",
    "consensus_division_min_cuts",
    "ConsensusDivision",
    "ConsensusNotFoundError",
    "CopiedCake",
    "DomainError",
    "egalitarian_additive",
    "egalitarian_uniform",
    "enumerate_maximal_feasible_sets",
    "even_paz",
    "extract_consensus_from_egalitarian",
    "fairness_report",
    "FairnessReport",
    "FeasibilityReport",
    "FeasibleSet",
    "generate_instance",
    "gfs_allocation",
    "gfs_check",
    "GFSInfeasibleError",
    "ifs_check",
    "InfeasibleAllocationError",
    "Instance",
    "InstanceError",
    "load_instance",
    "load_schedule",
    "Metrics",
    "minimize_switches",
    "normalize_utilities",
    "PackingNotFoundError",
    "PiecewiseConstantUtility",
    "q_times_bin_pack",
    "QPacking",
    "reduce_consensus_to_electricity",
    "save_instance",
    "save_schedule",
    "SegmentAssignment",
    "SetDistribution",
    "StructureError",
    "TooManyAgentsError",
    "utility_of",
]

__version__ = "0.1.0"
