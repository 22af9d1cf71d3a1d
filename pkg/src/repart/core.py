"""Problem model: instances, assignments, request sequences and cost accounting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CapacityExceeded, InvalidInstance

Edge = tuple[int, int]


def as_fraction(value) -> Fraction:
    """Coerce ``value`` to an exact :class:`Fraction`.

    Accepts ints, Fractions, ``"num/den"`` strings and ``[num, den]`` pairs.
    Floats are rejected since they would make ledger comparisons inexact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class Instance:
    """Parameters, ground truth and initial placement of one problem instance.

    ``initial[v]`` is the server vertex ``v`` starts on. ``ground_truth`` may be
    ``None`` for an *online view*: online algorithms never look at it, and
    adaptive adversaries only fix it once the run is over.
    """

    n: int
    ell: int
    epsilon: Fraction
    alpha: Fraction
    initial: tuple[int, ...]
    ground_truth: tuple[frozenset[int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "initial", tuple(int(s) for s in self.initial))
        if self.ground_truth is not None:
            object.__setattr__(
                self, "ground_truth", tuple(frozenset(int(v) for v in part) for part in self.ground_truth)
            )
        self._validate()

    def _validate(self):
        n, ell = self.n, self.ell
        if n < 1 or ell < 1:
            raise InvalidInstance("n and ell must be positive")
        if n % ell:
            raise InvalidInstance(f"ell={ell} must divide n={n}")
        if not 0 <= self.epsilon < 1:
            raise InvalidInstance("epsilon must lie in [0, 1)")
        if self.alpha <= 1:
            raise InvalidInstance("alpha must exceed 1")
        if len(self.initial) != n:
            raise InvalidInstance("initial assignment must cover all n vertices")
        load = [0] * ell
        for s in self.initial:
            if not 0 <= s < ell:
                raise InvalidInstance(f"server index {s} out of range")
            load[s] += 1
        if any(x != n // ell for x in load):
            raise InvalidInstance("initial assignment must be perfectly balanced")
        if self.ground_truth is not None:
            if len(self.ground_truth) != ell:
                raise InvalidInstance("ground truth must consist of ell sets")
            seen: set[int] = set()
            for part in self.ground_truth:
                if len(part) != n // ell:
                    raise InvalidInstance("every ground-truth set must have n/ell vertices")
                seen |= part
            if seen != set(range(n)):
                raise InvalidInstance("ground-truth sets must partition the vertices")

    @property
    def block(self) -> int:
        """Perfectly balanced load n/ell."""
        return self.n // self.ell

    def initial_assignment(self) -> Assignment:
        return Assignment.from_servers(self.initial, self.ell)

    def online_view(self) -> Instance:
        """Copy of the instance with the ground truth removed."""
        return Instance(self.n, self.ell, self.epsilon, self.alpha, self.initial)

    def with_ground_truth(self, parts) -> Instance:
        return Instance(self.n, self.ell, self.epsilon, self.alpha, self.initial, tuple(parts))

    def component_of(self) -> list[int]:
        """Map each vertex to the index of its ground-truth set."""
        if self.ground_truth is None:
            raise InvalidInstance("instance has no ground truth")
        owner = [0] * self.n
        for i, part in enumerate(self.ground_truth):
            for v in part:
                owner[v] = i
        return owner


class Assignment:
    """Mutable vertex -> server map with per-server loads kept in sync."""

    __slots__ = ("server_of", "load")

    def __init__(self, server_of: list[int], load: list[int]):
        self.server_of = server_of
        self.load = load

    @classmethod
    def from_servers(cls, server_of: Iterable[int], ell: int) -> Assignment:
        server_of = list(server_of)
        load = [0] * ell
        for s in server_of:
            load[s] += 1
        return cls(server_of, load)

    @property
    def ell(self) -> int:
        return len(self.load)

    def copy(self) -> Assignment:
        return Assignment(list(self.server_of), list(self.load))

    def vertices_on(self, server: int) -> frozenset[int]:
        return frozenset(v for v, s in enumerate(self.server_of) if s == server)

    def parts(self) -> list[frozenset[int]]:
        out: list[set[int]] = [set() for _ in self.load]
        for v, s in enumerate(self.server_of):
            out[s].add(v)
        return [frozenset(p) for p in out]

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.server_of == other.server_of

    def __repr__(self):
        return f"Assignment(load={self.load})"


@dataclass
class CostLedger:
    """Running cost counters of one online run.

    ``moved_vertices`` is split by cause so analyses can tell small-to-large
    traffic from voting and rebalancing traffic.
    """

    comm_units: int = 0
    moved_vertices: int = 0
    rebalance_count: int = 0
    moves_by_reason: dict[str, int] = field(default_factory=dict)

    def total(self, alpha) -> Fraction:
        return self.comm_units + as_fraction(alpha) * self.moved_vertices

    def record_moves(self, count: int, reason: str):
        self.moved_vertices += count
        self.moves_by_reason[reason] = self.moves_by_reason.get(reason, 0) + count

    def snapshot(self) -> tuple[int, int, int]:
        return self.comm_units, self.moved_vertices, self.rebalance_count


@dataclass(frozen=True)
class RequestSequence:
    """Ordered communication requests; each edge lies inside one ground-truth set."""

    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges)

    def __len__(self):
        return len(self.edges)

    def __getitem__(self, i):
        return self.edges[i]

    def validate(self, instance: Instance):
        """Raise :class:`InvalidInstance` unless the sequence fits the model.

        Every edge must be intra-component and the edges together must connect
        each ground-truth set.
        """
        owner = instance.component_of()
        parent = list(range(instance.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        merges = 0
        for u, v in self.edges:
            if not (0 <= u < instance.n and 0 <= v < instance.n):
                raise InvalidInstance(f"edge ({u}, {v}) references an unknown vertex")
            if owner[u] != owner[v]:
                raise InvalidInstance(f"edge ({u}, {v}) crosses ground-truth sets")
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                merges += 1
        if merges != instance.n - instance.ell:
            raise InvalidInstance("sequence does not reveal the ground-truth components")


def capacity(instance: Instance) -> int:
    """Server capacity n/ell + floor(eps * n/ell)."""
    return instance.block + augmentation(instance)


def augmentation(instance: Instance) -> int:
    return int(instance.epsilon * instance.block)  # floor for non-negative rationals


def is_valid(assignment: Assignment, instance: Instance) -> bool:
    cap = capacity(instance)
    return all(x <= cap for x in assignment.load)


def is_perfect_partitioning(assignment: Assignment, instance: Instance) -> bool:
    if instance.ground_truth is None:
        raise InvalidInstance("instance has no ground truth")
    return sorted(map(sorted, assignment.parts())) == sorted(map(sorted, instance.ground_truth))


def apply_request(edge: Edge, assignment: Assignment, ledger: CostLedger) -> bool:
    """Charge one communication unit if the endpoints sit on different servers."""
    u, v = edge
    if assignment.server_of[u] != assignment.server_of[v]:
        ledger.comm_units += 1
        return True
    return False


def move_component(
    vertices: Sequence[int],
    target: int,
    assignment: Assignment,
    ledger: CostLedger,
    capacity: int | None = None,
    reason: str = "move",
) -> int:
    """Relocate ``vertices`` to ``target`` and return how many actually moved.

    With ``capacity`` given the move is strict: it is refused atomically with
    :class:`CapacityExceeded` if the target would end up above capacity.
    """
    server_of, load = assignment.server_of, assignment.load
    moving = [v for v in vertices if server_of[v] != target]
    if capacity is not None and load[target] + len(moving) > capacity:
        raise CapacityExceeded(
            f"moving {len(moving)} vertices to server {target} (load {load[target]}) exceeds {capacity}"
        )
    for v in moving:
        load[server_of[v]] -= 1
        server_of[v] = target
    load[target] += len(moving)
    if moving:
        ledger.record_moves(len(moving), reason)
    return len(moving)


# -- serialization ---------------------------------------------------------------

def _frac_pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def instance_to_dict(instance: Instance, sequence: RequestSequence | Iterable[Edge] | None = None) -> dict:
    out = {
        "n": instance.n,
        "ell": instance.ell,
        "epsilon": _frac_pair(instance.epsilon),
        "alpha": _frac_pair(instance.alpha),
        "ground_truth": None if instance.ground_truth is None else [sorted(p) for p in instance.ground_truth],
        "initial": list(instance.initial),
    }
    if sequence is not None:
        out["edges"] = [[u, v] for u, v in sequence]
    return out


def instance_from_dict(data: dict) -> tuple[Instance, RequestSequence | None]:
    inst = Instance(
        n=int(data["n"]),
        ell=int(data["ell"]),
        epsilon=as_fraction(data["epsilon"]),
        alpha=as_fraction(data["alpha"]),
        initial=data["initial"],
        ground_truth=data.get("ground_truth"),
    )
    edges = data.get("edges")
    return inst, (None if edges is None else RequestSequence(tuple(map(tuple, edges))))


def save_instance(path, instance: Instance, sequence=None):
    Path(path).write_text(json.dumps(instance_to_dict(instance, sequence)))


def load_instance(path) -> tuple[Instance, RequestSequence | None]:
    return instance_from_dict(json.loads(Path(path).read_text()))
