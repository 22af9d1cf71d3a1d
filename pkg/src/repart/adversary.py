"""Request-sequence generators: random revealers and adaptive lower-bound constructions."""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .components import ComponentForest
from .core import Instance, RequestSequence, as_fraction
from .errors import BadParameters
from .online import OnlineAlgorithm

AlgorithmFactory = Callable[[Instance], OnlineAlgorithm]


@dataclass
class Transcript:
    """Output of a generator run; unpacks as ``(instance, sequence)``."""

    instance: Instance
    sequence: RequestSequence
    algorithm: OnlineAlgorithm | None = None
    annotations: list[dict] = field(default_factory=list)

    def __iter__(self):
        return iter((self.instance, self.sequence))


# -- random instances and sequences -----------------------------------------------

def random_instance(n: int, ell: int, epsilon, alpha=2, seed=None, swaps: int | None = None) -> Instance:
    """Ground truth ``V_i = {i*b, ..., (i+1)*b - 1}`` with ``b = n/ell``.

    ``swaps=None`` draws a uniformly random balanced initial assignment;
    an integer starts from the ground truth and applies that many swaps of
    vertices sitting on different servers.
    """
    if n % ell:
        raise BadParameters("ell must divide n")
    rng = random.Random(seed)
    b = n // ell
    parts = [range(i * b, (i + 1) * b) for i in range(ell)]
    if swaps is None:
        servers = [v // b for v in range(n)]
        rng.shuffle(servers)
    else:
        servers = [v // b for v in range(n)]
        if ell > 1:
            for _ in range(swaps):
                x, y = rng.randrange(n), rng.randrange(n)
                while servers[x] == servers[y]:
                    y = rng.randrange(n)
                servers[x], servers[y] = servers[y], servers[x]
    return Instance(n, ell, as_fraction(epsilon), as_fraction(alpha), tuple(servers), tuple(parts))


def random_tree_edges(vertices: list[int], rng: random.Random) -> list[tuple[int, int]]:
    """Edges of a uniformly random labelled spanning tree (decoded from a random Prüfer sequence)."""
    k = len(vertices)
    if k < 2:
        return []
    if k == 2:
        return [(vertices[0], vertices[1])]
    code = [rng.randrange(k) for _ in range(k - 2)]
    degree = [1] * k
    for x in code:
        degree[x] += 1
    leaves = [i for i in range(k) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in code:
        leaf = heapq.heappop(leaves)
        edges.append((vertices[leaf], vertices[x]))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    a, b = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((vertices[a], vertices[b]))
    return edges


def gen_random(instance: Instance, seed=None, repeat_factor: int = 1) -> RequestSequence:
    """Random spanning tree per ground-truth set, globally shuffled.

    With ``repeat_factor > 1`` another ``(repeat_factor - 1) * m`` copies of
    already-revealed edges are spread out after their first occurrence.
    """
    if repeat_factor < 1:
        raise BadParameters("repeat_factor must be at least 1")
    if instance.ground_truth is None:
        raise BadParameters("random revealer needs the ground truth")
    rng = random.Random(seed)
    edges = []
    for part in instance.ground_truth:
        edges.extend(random_tree_edges(sorted(part), rng))
    rng.shuffle(edges)
    edges = [(u, v) if rng.random() < 0.5 else (v, u) for u, v in edges]
    m = len(edges)
    if repeat_factor == 1 or m == 0:
        return RequestSequence(tuple(edges))
    keyed = [(float(i), 0, e) for i, e in enumerate(edges)]
    for t in range((repeat_factor - 1) * m):
        k = rng.randrange(m)
        keyed.append((rng.uniform(k, m), 1 + t, edges[k]))
    keyed.sort()
    return RequestSequence(tuple(e for _, _, e in keyed))


def wrap_repetition(sequence, factor: int) -> RequestSequence:
    """The sequence concatenated ``factor`` times."""
    if factor < 1:
        raise BadParameters("factor must be at least 1")
    return RequestSequence(tuple(sequence) * factor)


# -- the 1/eps construction -------------------------------------------------------

def inverse_eps_layout(n: int, epsilon) -> tuple[int, int]:
    """Return ``(K, q)`` for the construction or raise :class:`BadParameters`."""
    eps = as_fraction(epsilon)
    k = eps * n / 2
    if k.denominator != 1 or k < 1:
        raise BadParameters(f"eps*n/2 must be a positive integer, got {k}")
    k = int(k)
    if n % (2 * (k + 1)):
        raise BadParameters(f"2(K+1) = {2 * (k + 1)} must divide n = {n}")
    q = n // (2 * (k + 1))
    if q < 2:
        raise BadParameters("construction needs at least two small components on the left")
    return k, q


def gen_inverse_eps(n: int, epsilon, alpha=2, algorithm: AlgorithmFactory | None = None) -> Transcript:
    """Swap-chain instance that forces repeated swaps of size-(K+1) blocks.

    Left server: blocks ``C_1..C_q`` of size K+1 (vertices ``0..n/2-1`` in
    order). Right server: block ``C`` of size K+1 followed by ``C'`` of size
    ``n/2 - (K+1)``. After the intra-block path edges the chain joins ``C_1``
    with ``C``, then repeatedly joins the growing component with a free block,
    and finally joins the last free block with ``C'``.

    With ``algorithm`` (a factory called on the online view) the chain is
    adaptive: the next free block is one the algorithm currently keeps on the
    right server (lowest index), else the lowest free index. Without it the
    lowest free index is always used.
    """
    k, q = inverse_eps_layout(n, epsilon)
    half = n // 2
    blocks = [list(range(i * (k + 1), (i + 1) * (k + 1))) for i in range(q)]
    c = list(range(half, half + k + 1))
    c_prime = list(range(half + k + 1, n))
    initial = tuple(0 if v < half else 1 for v in range(n))
    online = Instance(n, 2, as_fraction(epsilon), as_fraction(alpha), initial)
    alg = None if algorithm is None else algorithm(online)

    edges: list[tuple[int, int]] = []
    notes: list[dict] = []

    def emit(e, phase):
        edges.append(e)
        split = None
        if alg is not None:
            split = alg.assignment.server_of[e[0]] != alg.assignment.server_of[e[1]]
            alg.process(e)
        notes.append({"phase": phase, "split": split})

    for block in blocks + [c, c_prime]:
        for a, b in zip(block, block[1:]):
            emit((a, b), "reveal")
    emit((blocks[0][0], c[0]), "chain")
    free = list(range(1, q))
    grown = [blocks[0], c]
    while len(free) > 1:
        pick = free[0]
        if alg is not None:
            on_right = [i for i in free if alg.assignment.server_of[blocks[i][0]] == 1]
            if on_right:
                pick = on_right[0]
        free.remove(pick)
        emit((c[0], blocks[pick][0]), "chain")
        grown.append(blocks[pick])
    last = free[0]
    emit((blocks[last][0], c_prime[0]), "final")
    big = frozenset(v for g in grown for v in g)
    rest = frozenset(range(n)) - big
    parts = (big, rest) if min(big) < min(rest) else (rest, big)
    inst = online.with_ground_truth(parts)
    return Transcript(inst, RequestSequence(tuple(edges)), alg, notes)


# -- the lg n construction --------------------------------------------------------

def gen_log_rounds(n: int, epsilon, algorithm: AlgorithmFactory | None = None, alpha=2) -> Transcript:
    """Adaptive rounds of expensive edges between equal-size components on different servers.

    Two servers, vertices ``0..n/2-1`` start on server 0. Round ``i`` starts
    with all components of size ``2**i``; while two of them sit on different
    servers the adversary joins the lexicographically smallest such pair of
    representatives, then pairs the rest in representative order. Rounds run
    until two components of size n/2 remain, which become the ground truth.
    """
    if n < 2 or n & (n - 1):
        raise BadParameters("n must be a power of two")
    eps = as_fraction(epsilon)
    if eps > Fraction(98, 100):
        raise BadParameters("epsilon must be at most 0.98")
    half = n // 2
    initial = tuple(0 if v < half else 1 for v in range(n))
    online = Instance(n, 2, eps, as_fraction(alpha), initial)
    alg = None if algorithm is None else algorithm(online)
    forest = ComponentForest(initial, 2)  # adversary's own bookkeeping
    server_of = alg.assignment.server_of if alg is not None else list(initial)

    edges: list[tuple[int, int]] = []
    notes: list[dict] = []

    def emit(a, b, rnd, expensive):
        split = server_of[a] != server_of[b]
        if expensive and not split:
            raise AssertionError("expensive edge emitted between collocated components")
        edges.append((a, b))
        notes.append({"round": rnd, "expensive": expensive, "split": split})
        if alg is not None:
            alg.process((a, b))
        forest.merge(a, b)

    rounds = n.bit_length() - 2  # components grow from 1 to n/2
    for rnd in range(rounds):
        size = 1 << rnd
        reps = sorted(r for r in forest.roots() if forest.size(r) == size)
        # reps are forest roots; use the smallest member as the representative
        reps = sorted(min(forest.members(r)) for r in reps)
        while True:
            pair = None
            if reps:
                a = reps[0]
                for b in reps[1:]:
                    if server_of[b] != server_of[a]:
                        pair = (a, b)
                        break
            if pair is None:
                break
            emit(pair[0], pair[1], rnd, True)
            reps.remove(pair[0])
            reps.remove(pair[1])
        # no expensive pair left: the rest share a server; pair them in order
        for a, b in zip(reps[0::2], reps[1::2]):
            emit(a, b, rnd, False)
    parts = sorted(forest.components(), key=min)
    inst = online.with_ground_truth(parts)
    return Transcript(inst, RequestSequence(tuple(edges)), alg, notes)
