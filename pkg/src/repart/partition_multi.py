"""ℓ-server algorithms built on a bipartition tree over the servers.

Tree nodes are numbered breadth-first: internal nodes get ids ``1..ell-1``
(the root is 1) and the leaf for server ``j`` gets id ``ell + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import Assignment, Instance
from .errors import BadParameters, SameServer
from .online import OnlineAlgorithm, crosses_power_of_two
from .partition2 import MAJORITY_VOTE, SMALL_TO_LARGE, SmallLargeRebalance, slr_process_edge, smaller_first


def ceil_lg(x: int) -> int:
    return (x - 1).bit_length()


@dataclass
class BipartitionTree:
    """Balanced binary tree whose leaves are the servers, in order left to right.

    ``lo[w], hi[w]`` delimit the contiguous server range ``S(w) = [lo, hi)``.
    """

    ell: int
    children: dict[int, tuple[int, int]] = field(default_factory=dict)
    parent: dict[int, int] = field(default_factory=dict)
    lo: dict[int, int] = field(default_factory=dict)
    hi: dict[int, int] = field(default_factory=dict)
    depth: dict[int, int] = field(default_factory=dict)

    root = 1

    def leaf(self, server: int) -> int:
        return self.ell + server

    def is_leaf(self, node: int) -> bool:
        return node >= self.ell

    def servers(self, node: int) -> range:
        return range(self.lo[node], self.hi[node])

    def internal_nodes(self) -> list[int]:
        return list(range(1, self.ell))

    def sibling(self, node: int) -> int:
        a, b = self.children[self.parent[node]]
        return b if a == node else a

    def ancestors(self, server: int) -> list[int]:
        """Internal nodes whose subtree contains ``server``, from the bottom up."""
        out = []
        x = self.leaf(server)
        while x != self.root:
            x = self.parent[x]
            out.append(x)
        return out

    def path_up(self, server: int, stop: int) -> list[int]:
        """Nodes from the leaf of ``server`` up to, but excluding, ``stop``."""
        out = []
        x = self.leaf(server)
        while x != stop:
            out.append(x)
            x = self.parent[x]
        return out


def build_tree(ell: int) -> BipartitionTree:
    """Split server ranges recursively, the left child taking the larger half."""
    if ell < 2:
        raise BadParameters("a bipartition tree needs at least two servers")
    tree = BipartitionTree(ell)
    tree.lo[1], tree.hi[1], tree.depth[1] = 0, ell, 0
    queue = [1]
    next_id = 2
    head = 0
    while head < len(queue):
        w = queue[head]
        head += 1
        lo, hi = tree.lo[w], tree.hi[w]
        mid = lo + (hi - lo + 1) // 2
        kids = []
        for a, b in ((lo, mid), (mid, hi)):
            if b - a == 1:
                node = ell + a
            else:
                node = next_id
                next_id += 1
                queue.append(node)
            tree.lo[node], tree.hi[node] = a, b
            tree.parent[node] = w
            tree.depth[node] = tree.depth[w] + 1
            kids.append(node)
        tree.children[w] = (kids[0], kids[1])
    assert next_id == ell
    return tree


def lca(tree: BipartitionTree, a: int, b: int) -> int:
    """Lowest internal node whose server set holds both servers."""
    if a == b:
        raise SameServer("servers must differ")
    x, y = tree.leaf(a), tree.leaf(b)
    while tree.depth[x] > tree.depth[y]:
        x = tree.parent[x]
    while tree.depth[y] > tree.depth[x]:
        y = tree.parent[y]
    while x != y:
        x, y = tree.parent[x], tree.parent[y]
    return x


def descend(tree: BipartitionTree, hist) -> int:
    """Follow the label majority from the root to a leaf; ties go to the left child."""
    w = tree.root
    while not tree.is_leaf(w):
        c0, c1 = tree.children[w]
        n0 = sum(hist[tree.lo[c0]:tree.hi[c0]])
        n1 = sum(hist[tree.lo[c1]:tree.hi[c1]])
        w = c0 if n0 >= n1 else c1
    return tree.lo[w]


def approx_offline(instance: Instance, sequence=None, tree: BipartitionTree | None = None) -> tuple[Assignment, int]:
    """Offline tree-descent placement: each ground-truth set goes to the leaf its majority path ends at.

    The ground truth is taken from ``instance`` or, if absent, from the
    connected components of ``sequence``. Returns the final assignment and the
    number of vertices that had to move.
    """
    if tree is None and instance.ell >= 2:
        tree = build_tree(instance.ell)
    parts = _ground_truth(instance, sequence)
    server_of = list(instance.initial)
    moved = 0
    for part in parts:
        hist = [0] * instance.ell
        for v in part:
            hist[instance.initial[v]] += 1
        target = 0 if tree is None else descend(tree, hist)
        moved += len(part) - hist[target]
        for v in part:
            server_of[v] = target
    return Assignment.from_servers(server_of, instance.ell), moved


def _ground_truth(instance: Instance, sequence) -> list[frozenset[int]]:
    if instance.ground_truth is not None:
        return list(instance.ground_truth)
    if sequence is None:
        raise BadParameters("need a ground truth or a request sequence")
    from .components import ComponentForest

    forest = ComponentForest(instance.initial, instance.ell)
    for u, v in sequence:
        forest.merge(u, v)
    return forest.components()


def stopping_threshold(instance: Instance) -> int:
    """floor(eps * n / (ell * ceil(lg ell)))."""
    return int(Fraction(instance.epsilon) * instance.n / (instance.ell * max(ceil_lg(instance.ell), 1)))


class RecursiveMajorityVoting(OnlineAlgorithm):
    """Small-to-large steps routed through the tree plus recursive majority votes.

    For every non-root node ``x`` the algorithm keeps ``foreign[x]``: how many
    vertices now on servers of ``x`` started on servers of ``x``'s sibling.
    A move that would raise any such count to the threshold is not performed
    and the algorithm stops.
    """

    name = "rmv"

    def __init__(self, instance: Instance, **kw):
        super().__init__(instance, **kw)
        if self.ell < 2:
            raise BadParameters("need at least two servers")
        self.tree = build_tree(self.ell)
        self.theta = stopping_threshold(instance)
        if self.theta < 1:
            raise BadParameters(
                f"stopping threshold is zero for n={self.n}, ell={self.ell}, eps={instance.epsilon}"
            )
        self.foreign = {x: 0 for x in self.tree.parent}
        self._stopped = False
        self.stop_edge = None

    @property
    def stopped(self) -> bool:
        return self._stopped

    def _react(self, u, v):
        if self._stopped:
            return ("stopped",)
        return rmv_process_edge(self, u, v)

    def _changes(self, root: int, target: int) -> dict[int, int]:
        """Foreign-count deltas if the component of ``root`` moved to ``target``."""
        # components are collocated while voting, so one source server and the
        # label histogram describe the whole move
        tree = self.tree
        src = self.assignment.server_of[root]
        delta: dict[int, int] = {}
        if src == target:
            return delta
        hist = self.forest.hist(root)
        top = lca(tree, src, target)
        for sign, end in ((-1, src), (1, target)):
            for node in tree.path_up(end, top):
                sib = tree.sibling(node)
                k = sum(hist[tree.lo[sib]:tree.hi[sib]])
                if k:
                    delta[node] = sign * k
        return delta

    def check_move(self, root: int, target: int) -> tuple[bool, dict[int, int]]:
        delta = self._changes(root, target)
        triggered = any(d > 0 and self.foreign[x] + d >= self.theta for x, d in delta.items())
        self.emit("check", root=root, size=self.forest.size(root), target=target, triggered=triggered)
        return triggered, delta

    def guarded_move(self, root: int, target: int, reason: str) -> bool:
        """Move unless the stopping criterion fires; return False on stop."""
        triggered, delta = self.check_move(root, target)
        if triggered:
            self._stopped = True
            self.emit("stop")
            return False
        for x, d in delta.items():
            self.foreign[x] += d
        self.move(root, target, reason)
        return True


def check_stopping_criterion(state: RecursiveMajorityVoting, root: int, target: int) -> bool:
    """Would moving the component of ``root`` to ``target`` overload some node?"""
    delta = state._changes(state.forest.find(root), target)
    return any(d > 0 and state.foreign[x] + d >= state.theta for x, d in delta.items())


def rmv_process_edge(state: RecursiveMajorityVoting, u: int, v: int) -> tuple[str, ...]:
    forest, asg = state.forest, state.assignment
    ru, rv = forest.find(u), forest.find(v)
    if ru == rv:
        return ()
    if asg.server_of[ru] == asg.server_of[rv]:
        state.emit("merge_edge", edge=(u, v), server=asg.server_of[u])
        forest.merge(ru, rv)
        return ("merge_only",)
    small, large = smaller_first(forest, ru, rv)
    a, b = forest.size(small), forest.size(large)
    server_u = asg.server_of[u]
    if not state.guarded_move(small, asg.server_of[large], SMALL_TO_LARGE):
        state.stop_edge = (u, v)
        return ("stopped",)
    state.emit("merge_edge", edge=(u, v), server=server_u)
    root = forest.merge(ru, rv)
    kinds = [SMALL_TO_LARGE]
    if a + b == state.instance.block or crosses_power_of_two(a, b):
        target = descend(state.tree, forest.hist(root))
        if asg.server_of[root] != target:
            if not state.guarded_move(root, target, MAJORITY_VOTE):
                kinds.append("stopped")
                return tuple(kinds)
            kinds.append(MAJORITY_VOTE)
        else:
            state.emit("vote", root=root, target=target)
    return tuple(kinds)


class SlrMulti(SmallLargeRebalance):
    """Small-Large-Rebalance for ℓ servers (``mode='cheap'`` exact, ``'poly'`` approximate)."""

    name = "slr-multi"


def slr_multi(state: SmallLargeRebalance, u: int, v: int) -> str:
    return slr_process_edge(state, u, v)


class CombinedMultiServer(RecursiveMajorityVoting):
    """Recursive Majority Voting until the stopping criterion fires, then cheap SLR for good.

    If the stop blocked a small-to-large step, the pending edge is handed to
    the SLR phase; a blocked vote needs nothing further since the edge's
    components are already merged and collocated.
    """

    name = "combinedL"

    def __init__(self, instance: Instance, mode: str = "cheap", eps_prime=None, **kw):
        super().__init__(instance, **kw)
        self.mode = mode
        self.eps_prime = (Fraction(instance.epsilon) / 2 if eps_prime is None else Fraction(eps_prime)) if mode == "poly" else None
        self.post_rebalance_loads: list[list[int]] = []
        self.switched_at: int | None = None

    rebalance = SmallLargeRebalance.rebalance

    def _react(self, u, v):
        if self._stopped:
            return (slr_process_edge(self, u, v),)
        kinds = rmv_process_edge(self, u, v)
        if "stopped" not in kinds:
            return kinds
        self.switched_at = self.steps
        self.emit("switch", edge=(u, v))
        if self.stop_edge == (u, v):
            return kinds + (slr_process_edge(self, u, v),)
        return kinds


def combined_multi_server(instance: Instance, sequence, **kw):
    alg = CombinedMultiServer(instance, **kw).run(sequence)
    return alg.assignment, alg.ledger
