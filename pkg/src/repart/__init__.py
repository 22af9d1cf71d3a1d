"""Online repartitioning of communicating vertices onto capacity-bounded servers."""

from .adversary import gen_inverse_eps, gen_log_rounds, gen_random, random_instance, wrap_repetition
from .apps import KWayFacade, UnionFindFacade, kway_add, uf_find, uf_union
from .components import ComponentForest
from .core import (
    Assignment,
    CostLedger,
    Instance,
    RequestSequence,
    apply_request,
    capacity,
    is_perfect_partitioning,
    is_valid,
    load_instance,
    move_component,
    save_instance,
)
from .distsim import MessageLedger, sim_rmv, sim_slr
from .errors import (
    ApproximationFailed,
    BadParameters,
    CapacityExceeded,
    InvalidInstance,
    NoBalancedAssignment,
    OffIsZero,
    RepartError,
    SameServer,
    WrongServerCount,
)
from .estimators import OfflinePartitioner, OnlinePartitioner
from .oracle import OffResult, competitive_ratio, off_optimal
from .partition2 import (
    CombinedTwoServer,
    MajorityVoting,
    SmallLargeRebalance,
    combined_two_server,
    delta_two,
)
from .partition_multi import (
    BipartitionTree,
    CombinedMultiServer,
    RecursiveMajorityVoting,
    approx_offline,
    build_tree,
    combined_multi_server,
    lca,
)

__version__ = "0.1.0"
