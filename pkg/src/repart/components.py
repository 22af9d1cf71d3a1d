"""Union-find over vertices that also tracks component sizes, members and labels."""

from __future__ import annotations

from typing import Iterable, Sequence


class ComponentForest:
    """Disjoint sets over ``0..n-1`` with per-root bookkeeping.

    Every root carries the component size, its member list, and a histogram of
    how many members started on each server (the vertex *labels*, which never
    change). Only roots hold valid bookkeeping.

    >>> f = ComponentForest([0, 0, 1, 1], ell=2)
    >>> r = f.merge(0, 2)
    >>> f.size(r), f.hist(r)
    (2, [1, 1])
    """

    def __init__(self, initial_servers: Sequence[int], ell: int):
        n = len(initial_servers)
        self.n = n
        self.ell = ell
        self.parent = list(range(n))
        self.rank = [0] * n
        self._size = [1] * n
        self._members: list[list[int] | None] = [[v] for v in range(n)]
        self._hist: list[list[int] | None] = []
        for s in initial_servers:
            h = [0] * ell
            h[s] = 1
            self._hist.append(h)
        self.label = list(initial_servers)
        self.count = n

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def same(self, u: int, v: int) -> bool:
        return self.find(u) == self.find(v)

    def merge(self, u: int, v: int) -> int:
        """Union the components of ``u`` and ``v``; return the surviving root."""
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return ru
        if self.rank[ru] < self.rank[rv]:
            ru, rv = rv, ru
        elif self.rank[ru] == self.rank[rv]:
            self.rank[ru] += 1
        self.parent[rv] = ru
        self._size[ru] += self._size[rv]
        hu, hv = self._hist[ru], self._hist[rv]
        for j in range(self.ell):
            hu[j] += hv[j]
        mu, mv = self._members[ru], self._members[rv]
        # append the shorter list to the longer one
        if len(mu) < len(mv):
            mv.extend(mu)
            self._members[ru] = mv
        else:
            mu.extend(mv)
        self._members[rv] = None
        self._hist[rv] = None
        self.count -= 1
        return ru

    def size(self, root: int) -> int:
        return self._size[root]

    def hist(self, root: int) -> list[int]:
        return self._hist[root]

    def members(self, root: int) -> list[int]:
        return self._members[root]

    def label_count(self, root: int, servers: Iterable[int]) -> int:
        """Number of members of ``root``'s component that started on ``servers``."""
        h = self._hist[self.find(root)]
        return sum(h[j] for j in servers)

    def label_count_range(self, root: int, lo: int, hi: int) -> int:
        """Fast path of :meth:`label_count` for the contiguous server range [lo, hi)."""
        return sum(self._hist[root][lo:hi])

    def roots(self) -> list[int]:
        return [v for v in range(self.n) if self.parent[v] == v]

    def components(self) -> list[frozenset[int]]:
        return [frozenset(self._members[r]) for r in self.roots()]
