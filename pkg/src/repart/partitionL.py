"""Alias of :mod:`repart.partition_multi` under its short name."""

from .partition_multi import (  # noqa: F401
    BipartitionTree,
    CombinedMultiServer,
    RecursiveMajorityVoting,
    SlrMulti,
    approx_offline,
    build_tree,
    ceil_lg,
    check_stopping_criterion,
    combined_multi_server,
    descend,
    lca,
    rmv_process_edge,
    slr_multi,
    stopping_threshold,
)
