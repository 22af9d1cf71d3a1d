"""Two-server algorithms: Small-Large-Rebalance, Majority Voting and their combination.

:class:`SmallLargeRebalance` works for any number of servers; the ℓ-server
module reuses it for its fallback phase.
"""

from __future__ import annotations

from fractions import Fraction

from .core import Instance, RequestSequence
from .errors import NoBalancedAssignment, WrongServerCount
from .online import OnlineAlgorithm, crosses_power_of_two
from .rebalance import (
    approx_balanced_multi,
    cheap_balanced_multi,
    cheap_balanced_two,
    dp_balanced_two,
    exact_balanced_multi,
    map_groups_to_servers,
)

NONE, SMALL_TO_LARGE, REBALANCE, MAJORITY_VOTE = "none", "small_to_large", "rebalance", "majority_vote"


def smaller_first(forest, ru: int, rv: int) -> tuple[int, int]:
    """Order two roots as (mover, stayer); on equal sizes the smaller root id moves."""
    su, sv = forest.size(ru), forest.size(rv)
    if su < sv or (su == sv and ru < rv):
        return ru, rv
    return rv, ru


class SmallLargeRebalance(OnlineAlgorithm):
    """Move the smaller component to the larger one; rebalance when capacity runs out.

    ``mode``:

    * ``"plain"``: any perfectly balanced component-respecting assignment,
    * ``"cheap"``: the one with fewest vertices away from their initial server,
    * ``"poly"``: first-fit-decreasing placement with loads at most
      ``(1 + eps_prime) n / ell`` (falls back to an exact split).

    On a capacity breach the two components are merged first and the
    rebalance places the merged component as a whole, so the edge always ends
    up collocated without an extra small-to-large move.
    """

    name = "slr"

    def __init__(self, instance: Instance, mode: str = "cheap", eps_prime=None, **kw):
        super().__init__(instance, **kw)
        if mode not in ("plain", "cheap", "poly"):
            raise ValueError(f"unknown rebalancing mode {mode!r}")
        self.mode = mode
        if mode == "poly":
            self.eps_prime = Fraction(instance.epsilon) / 2 if eps_prime is None else Fraction(eps_prime)
        else:
            self.eps_prime = None
        self.post_rebalance_loads: list[list[int]] = []

    def _react(self, u, v):
        return (slr_process_edge(self, u, v),)

    def rebalance(self):
        """Re-place every component according to the configured mode."""
        forest, asg, ell = self.forest, self.assignment, self.ell
        roots = forest.roots()
        sizes = [(r, forest.size(r)) for r in roots]
        current = {}
        for r in roots:
            vec = [0] * ell
            for x in forest.members(r):
                vec[asg.server_of[x]] += 1
            current[r] = vec
        if self.mode == "cheap":
            hist = {r: forest.hist(r) for r in roots}
            if ell == 2:
                target = cheap_balanced_two(sizes, hist, current)
            else:
                target = cheap_balanced_multi(sizes, hist, ell, current)
        elif self.mode == "plain":
            if ell == 2:
                side = dp_balanced_two(sizes, self.n)
                groups = None if side is None else [sorted(side), [r for r in roots if r not in side]]
            else:
                groups = exact_balanced_multi(sizes, ell, self.n)
            target = None if groups is None else map_groups_to_servers(groups, sizes, current)
        else:
            target = approx_balanced_multi(sizes, ell, self.n, self.eps_prime, current)
        if target is None:
            raise NoBalancedAssignment("components admit no perfectly balanced placement")
        self.emit("rebalance_start", target=dict(target))
        for r in roots:
            self.place(forest.members(r), target[r], "rebalance")
        self.ledger.rebalance_count += 1
        self.post_rebalance_loads.append(list(asg.load))
        self.emit("rebalance_end", loads=tuple(asg.load))


def slr_process_edge(state: SmallLargeRebalance, u: int, v: int) -> str:
    """One Small-Large-Rebalance step for edge (u, v); returns the step kind."""
    forest, asg = state.forest, state.assignment
    ru, rv = forest.find(u), forest.find(v)
    if ru == rv:
        return NONE
    su, sv = asg.server_of[ru], asg.server_of[rv]
    if su == sv:
        state.emit("merge_edge", edge=(u, v), server=su)
        forest.merge(ru, rv)
        return NONE
    small, large = smaller_first(forest, ru, rv)
    dst = asg.server_of[large]
    state.emit("merge_edge", edge=(u, v), server=asg.server_of[u])
    if asg.load[dst] + forest.size(small) <= state.capacity:
        state.move(small, dst, SMALL_TO_LARGE)
        forest.merge(ru, rv)
        return SMALL_TO_LARGE
    forest.merge(ru, rv)
    state.rebalance()
    return REBALANCE


def slr_cheap_rebalance(state: SmallLargeRebalance):
    """Apply a cheap rebalance to ``state`` and return its assignment."""
    saved = state.mode
    state.mode = "cheap"
    try:
        state.rebalance()
    finally:
        state.mode = saved
    return state.assignment


class MajorityVoting(OnlineAlgorithm):
    """Small-to-large merging plus a majority vote whenever a merge crosses a power of two.

    Colors are the initial servers (0 = left, 1 = right). Votes need a strict
    majority; ties leave the component where it is.

    With ``load_limit`` set, a move that would push a server above the limit is
    not performed: :attr:`breach` records it and the edge is left unmerged so a
    combining algorithm can take over.
    """

    name = "mv"

    def __init__(self, instance: Instance, load_limit: int | None = None, **kw):
        if instance.ell != 2:
            raise WrongServerCount("majority voting needs exactly two servers")
        super().__init__(instance, **kw)
        self.load_limit = load_limit
        self.breach: tuple[int, int] | None = None

    def _react(self, u, v):
        return mv_process_edge(self, u, v)

    def _fits(self, root: int, target: int) -> bool:
        if self.load_limit is None:
            return True
        asg = self.assignment
        moving = sum(1 for x in self.forest.members(root) if asg.server_of[x] != target)
        return asg.load[target] + moving <= self.load_limit


def mv_process_edge(state: MajorityVoting, u: int, v: int) -> tuple[str, ...]:
    forest, asg = state.forest, state.assignment
    ru, rv = forest.find(u), forest.find(v)
    if ru == rv:
        return ()
    kinds = []
    small, large = smaller_first(forest, ru, rv)
    a, b = forest.size(small), forest.size(large)
    server_u = asg.server_of[u]
    if asg.server_of[small] != asg.server_of[large]:
        dst = asg.server_of[large]
        if not state._fits(small, dst):
            state.breach = (u, v)
            return ("breach",)
        state.move(small, dst, SMALL_TO_LARGE, strict=False)
        kinds.append(SMALL_TO_LARGE)
    state.emit("merge_edge", edge=(u, v), server=server_u)
    root = forest.merge(ru, rv)
    if crosses_power_of_two(a, b):
        yellow, black = forest.hist(root)
        target = 0 if yellow > black else 1 if black > yellow else None
        if target is not None and asg.server_of[root] != target:
            if not state._fits(root, target):
                state.breach = (u, v)
                kinds.append("breach")
                return tuple(kinds)
            state.move(root, target, MAJORITY_VOTE, strict=False)
            kinds.append(MAJORITY_VOTE)
    return tuple(kinds)


class CombinedTwoServer(SmallLargeRebalance):
    """Majority Voting until it would exceed capacity, then cheap Small-Large-Rebalance for good.

    At the switch the state is carried over unchanged: the pending edge's
    components are merged (if the breach happened before merging) and a cheap
    rebalance establishes a valid, component-respecting assignment.
    """

    name = "combined2"

    def __init__(self, instance: Instance, **kw):
        if instance.ell != 2:
            raise WrongServerCount("the two-server combination needs exactly two servers")
        super().__init__(instance, mode="cheap", **kw)
        self.load_limit = self.capacity
        self.breach: tuple[int, int] | None = None
        self.phase = "mv"
        self.switched_at: int | None = None

    _fits = MajorityVoting._fits

    @property
    def switched(self) -> bool:
        return self.phase == "slr"

    def _react(self, u, v):
        if self.phase == "slr":
            return (slr_process_edge(self, u, v),)
        kinds = mv_process_edge(self, u, v)
        if self.breach is None:
            return kinds
        self.phase = "slr"
        self.switched_at = self.steps
        self.emit("switch", edge=(u, v))
        if not self.forest.same(u, v):
            self.emit("merge_edge", edge=(u, v), server=self.assignment.server_of[u])
            self.forest.merge(u, v)
        self.rebalance()
        return tuple(k for k in kinds if k != "breach") + ("switch", REBALANCE)


def combined_two_server(instance: Instance, sequence, **kw):
    alg = CombinedTwoServer(instance, **kw).run(sequence)
    return alg.assignment, alg.ledger


def delta_two(instance: Instance) -> int:
    """Smaller overlap of server 0's initial contents with either ground-truth set."""
    if instance.ell != 2:
        raise WrongServerCount("delta is defined for two servers")
    if instance.ground_truth is None:
        raise ValueError("instance has no ground truth")
    s0 = {v for v, s in enumerate(instance.initial) if s == 0}
    v0, v1 = instance.ground_truth
    return min(len(s0 & v0), len(s0 & v1))


def run_algorithm(cls, instance: Instance, sequence: RequestSequence, **kw):
    return cls(instance, **kw).run(sequence)
