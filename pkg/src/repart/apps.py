"""Union-find and k-way partitioning on top of the online algorithms."""

from __future__ import annotations

from .core import Instance
from .errors import BadParameters
from .online import OnlineAlgorithm
from .partition_multi import CombinedMultiServer


class UnionFindFacade:
    """Disjoint sets whose members always live on one server.

    Each ``union`` is fed to the underlying algorithm as a request edge; the
    algorithm alone decides which elements physically move.
    """

    def __init__(self, instance: Instance, algorithm=CombinedMultiServer, **kw):
        self.alg: OnlineAlgorithm = algorithm(instance, **kw)

    @property
    def ledger(self):
        return self.alg.ledger

    def union(self, u: int, v: int):
        self.alg.process((u, v))

    def find(self, u: int) -> tuple[int, int]:
        """``(set id, server)`` for element ``u``; reading is free."""
        root = self.alg.forest.find(u)
        return root, self.alg.assignment.server_of[u]


def uf_union(facade: UnionFindFacade, u: int, v: int):
    facade.union(u, v)


def uf_find(facade: UnionFindFacade, u: int) -> tuple[int, int]:
    return facade.find(u)


class KWayFacade:
    """A multiset of integers, each backed by a component; servers are the bins.

    Starts with ``n`` ones (one per vertex). ``add(a, b)`` replaces the two
    integers with their sum by joining the backing components. Integer ids are
    the roots of the backing components.
    """

    def __init__(self, instance: Instance, algorithm=CombinedMultiServer, **kw):
        self.alg: OnlineAlgorithm = algorithm(instance, **kw)

    @property
    def values(self) -> dict[int, int]:
        forest = self.alg.forest
        return {r: forest.size(r) for r in forest.roots()}

    def value(self, ident: int) -> int:
        forest = self.alg.forest
        if forest.find(ident) != ident:
            raise BadParameters(f"{ident} is not a live integer")
        return forest.size(ident)

    def bin_of(self, ident: int) -> int:
        return self.alg.assignment.server_of[ident]

    def bins(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.alg.ell)]
        for r, size in self.values.items():
            out[self.bin_of(r)].append(size)
        return out

    def add(self, a: int, b: int) -> int:
        forest = self.alg.forest
        if a == b or forest.find(a) != a or forest.find(b) != b:
            raise BadParameters("add needs two distinct live integers")
        self.alg.process((a, b))
        return forest.find(a)

    @property
    def moved_vertices(self) -> int:
        return self.alg.ledger.moved_vertices


def kway_add(facade: KWayFacade, a: int, b: int) -> int:
    return facade.add(a, b)
