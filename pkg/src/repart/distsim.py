"""Message-level simulation of the distributed protocols.

The simulation re-runs a centralized algorithm and listens to its events.
Each server keeps its own vertex store (vertex -> initial server label);
vertex transfers between stores are what the simulation counts as move
messages. Control traffic follows fixed charge rules:

* stopping-criterion check before moving component ``C``:
  ``min(|C|, ceil(lg ell)) + 2`` (labels or per-ancestor counts, plus an id
  request and response),
* majority-vote target: free, computed locally by the server holding ``C``,
* stop broadcast: ``ell``,
* rebalance (rebuild): 1 to start, then per server the number of merging
  edges it saw since the last rebuild (at least 1), then 1 per component
  that changes server.
"""

from __future__ import annotations

from dataclasses import dataclass

from .components import ComponentForest
from .core import Assignment, CostLedger, Instance
from .online import MoveRecord, OnlineAlgorithm
from .partition_multi import CombinedMultiServer, SlrMulti, ceil_lg, descend


@dataclass
class MessageLedger:
    move_msgs: int = 0
    control_msgs: int = 0
    rebuilds: int = 0

    @property
    def total(self) -> int:
        return self.move_msgs + self.control_msgs


class ServerNode:
    """One server's local view: the vertices it stores and their labels."""

    def __init__(self, index: int):
        self.index = index
        self.store: dict[int, int] = {}
        self.merge_edges = 0  # merging edges received since the last rebuild

    def send(self, vertices, other: "ServerNode") -> int:
        for v in vertices:
            other.store[v] = self.store.pop(v)
        return len(vertices)


class DistributedRun:
    """Drive ``algorithm`` while charging messages for everything it does."""

    def __init__(self, algorithm: OnlineAlgorithm):
        self.alg = algorithm
        inst = algorithm.instance
        self.ell = inst.ell
        self.lg = max(ceil_lg(inst.ell), 1)
        self.nodes = [ServerNode(j) for j in range(inst.ell)]
        for v, s in enumerate(inst.initial):
            self.nodes[s].store[v] = s
        self.messages = MessageLedger()
        self.moves: list[MoveRecord] = []
        # the coordinator (server 0) replays merging edges to know the components
        self.coordinator_forest = ComponentForest(inst.initial, inst.ell)
        self.tree = getattr(algorithm, "tree", None)
        algorithm.listener = self.on_event

    def on_event(self, event: str, payload: dict):
        handler = getattr(self, "_on_" + event, None)
        if handler is not None:
            handler(**payload)

    def _on_check(self, root, size, target, triggered):
        self.messages.control_msgs += min(size, self.lg) + 2

    def _on_stop(self):
        self.messages.control_msgs += self.ell

    def _on_merge_edge(self, edge, server):
        self.nodes[server].merge_edges += 1
        self.coordinator_forest.merge(*edge)

    def _on_move(self, vertices, src, dst, reason):
        vertices = list(vertices)
        if reason == "majority_vote" and self.tree is not None:
            # the holding server recomputes the vote target from its own labels
            hist = [0] * self.ell
            for v in vertices:
                hist[self.nodes[src].store[v]] += 1
            if descend(self.tree, hist) != dst:
                raise AssertionError("locally computed vote target disagrees with the algorithm")
        sent = 0
        by_src: dict[int, list[int]] = {}
        for v in vertices:
            owner = self._owner(v, src)
            if owner != dst:
                by_src.setdefault(owner, []).append(v)
        for s, vs in by_src.items():
            sent += self.nodes[s].send(vs, self.nodes[dst])
        self.messages.move_msgs += sent
        self.moves.append((tuple(vertices), src, dst, reason))

    def _owner(self, v: int, hint: int) -> int:
        if hint >= 0 and v in self.nodes[hint].store:
            return hint
        for node in self.nodes:
            if v in node.store:
                return node.index
        raise KeyError(v)

    def _on_rebalance_start(self, target):
        alg = self.alg
        forest = self.coordinator_forest
        mine = sorted(sorted(c) for c in forest.components())
        theirs = sorted(sorted(c) for c in alg.forest.components())
        if mine != theirs:
            raise AssertionError("coordinator's components diverge from the algorithm's")
        m = self.messages
        m.rebuilds += 1
        m.control_msgs += 1
        for node in self.nodes:
            m.control_msgs += max(node.merge_edges, 1)
            node.merge_edges = 0
        server_of = alg.assignment.server_of
        for root, dst in target.items():
            if any(server_of[v] != dst for v in alg.forest.members(root)):
                m.control_msgs += 1

    def run(self, edges):
        self.alg.run(edges)
        return self

    def assignment(self) -> Assignment:
        server_of = [0] * self.alg.n
        for node in self.nodes:
            for v in node.store:
                server_of[v] = node.index
        return Assignment.from_servers(server_of, self.ell)


def simulate(algorithm: OnlineAlgorithm, sequence) -> DistributedRun:
    return DistributedRun(algorithm).run(sequence)


def sim_rmv(instance: Instance, sequence, **kw) -> tuple[Assignment, CostLedger, MessageLedger]:
    """Distributed run of Recursive Majority Voting with the SLR fallback."""
    run = simulate(CombinedMultiServer(instance, **kw), sequence)
    return run.assignment(), run.alg.ledger, run.messages


def sim_slr(instance: Instance, sequence, mode: str = "cheap", **kw) -> tuple[Assignment, CostLedger, MessageLedger]:
    """Distributed run of Small-Large-Rebalance with a coordinator on server 0."""
    run = simulate(SlrMulti(instance, mode=mode, **kw), sequence)
    return run.assignment(), run.alg.ledger, run.messages
