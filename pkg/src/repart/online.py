"""Shared driver for online algorithms: request charging, move logging, observers."""

from __future__ import annotations

from typing import Callable, Iterable

from .components import ComponentForest
from .core import Assignment, CostLedger, Edge, Instance, apply_request, capacity, move_component

# (vertices, source server, target server, reason)
MoveRecord = tuple[tuple[int, ...], int, int, str]


def crosses_power_of_two(a: int, b: int) -> bool:
    """True iff some 2**i satisfies a < 2**i, b < 2**i <= a + b."""
    return max(a, b).bit_length() < (a + b).bit_length()


class OnlineAlgorithm:
    """Base class: holds the live assignment, the component forest and the ledger.

    Subclasses implement :meth:`_react`. The algorithm only ever sees the
    online view of the instance (no ground truth).

    ``listener`` receives ``(event, payload)`` pairs; ``observer`` is called as
    ``observer(algorithm, edge, kinds)`` after every processed request and is
    the hook tests use for per-step invariants.
    """

    name = "online"

    def __init__(self, instance: Instance, *, listener: Callable | None = None, observer: Callable | None = None):
        self.instance = instance.online_view()
        self.n, self.ell = instance.n, instance.ell
        self.capacity = capacity(instance)
        self.assignment: Assignment = instance.initial_assignment()
        self.forest = ComponentForest(instance.initial, instance.ell)
        self.ledger = CostLedger()
        self.moves: list[MoveRecord] = []
        self.listener = listener
        self.observer = observer
        self.steps = 0
        self.max_load = max(self.assignment.load)

    # -- plumbing -------------------------------------------------------------

    def emit(self, event: str, **payload):
        if self.listener is not None:
            self.listener(event, payload)

    def server_of_root(self, root: int) -> int:
        return self.assignment.server_of[root]

    def move(self, root: int, target: int, reason: str, strict: bool = True) -> int:
        """Move the whole component of ``root`` to ``target``; log and return the moved count."""
        vertices = self.forest.members(self.forest.find(root))
        src = self.assignment.server_of[vertices[0]]
        moved = move_component(
            vertices, target, self.assignment, self.ledger, self.capacity if strict else None, reason
        )
        if moved:
            record = (tuple(vertices), src, target, reason)
            self.moves.append(record)
            self.emit("move", vertices=record[0], src=src, dst=target, reason=reason)
            self.max_load = max(self.max_load, self.assignment.load[target])
        return moved

    def place(self, vertices, target: int, reason: str) -> int:
        """Unchecked move of an explicit vertex list (used by rebalancing)."""
        srcs = {self.assignment.server_of[v] for v in vertices}
        moved = move_component(vertices, target, self.assignment, self.ledger, None, reason)
        if moved:
            record = (tuple(vertices), srcs.pop() if len(srcs) == 1 else -1, target, reason)
            self.moves.append(record)
            self.emit("move", vertices=record[0], src=record[1], dst=target, reason=reason)
        return moved

    # -- driving --------------------------------------------------------------

    @property
    def stopped(self) -> bool:
        return False

    def process(self, edge: Edge) -> tuple[str, ...]:
        u, v = int(edge[0]), int(edge[1])
        split = apply_request((u, v), self.assignment, self.ledger)
        self.emit("request", edge=(u, v), split=split, server_u=self.assignment.server_of[u])
        kinds = self._react(u, v)
        self.steps += 1
        self.max_load = max(self.max_load, max(self.assignment.load))
        if self.observer is not None:
            self.observer(self, (u, v), kinds)
        return kinds

    def run(self, edges: Iterable[Edge]):
        for e in edges:
            self.process(e)
        return self

    def result(self) -> tuple[Assignment, CostLedger]:
        return self.assignment, self.ledger

    def _react(self, u: int, v: int) -> tuple[str, ...]:
        raise NotImplementedError
