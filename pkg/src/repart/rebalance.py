"""Balanced-assignment solvers used by rebalancing steps.

Components are described by ``(component_id, size)`` pairs. Functions that
search for a perfectly balanced partition return ``None`` when none exists;
callers turn that into :class:`~repart.errors.NoBalancedAssignment`.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linear_sum_assignment, linprog, milp

from .errors import ApproximationFailed, BadParameters

SizeMultiset = Sequence[tuple[int, int]]


def _pairs(sizes) -> list[tuple[int, int]]:
    items = sizes.items() if isinstance(sizes, Mapping) else sizes
    out = sorted((int(c), int(s)) for c, s in items)
    if any(s < 1 for _, s in out):
        raise BadParameters("component sizes must be positive")
    return out


def dp_balanced_two(sizes, n: int) -> frozenset[int] | None:
    """Find components whose sizes sum to exactly n/2.

    Reachable-sums dynamic program: every reachable sum keeps a predecessor
    ``(previous sum, component)`` so one witness can be rebuilt. Runs in
    O(q * n) for q components.
    """
    items = _pairs(sizes)
    if n % 2 or sum(s for _, s in items) != n:
        raise BadParameters("sizes must sum to an even n")
    target = n // 2
    pred: dict[int, tuple[int, int] | None] = {0: None}
    for cid, k in items:
        if target in pred:
            break
        for s in list(pred):
            t = s + k
            if t <= target and t not in pred:
                pred[t] = (s, cid)
    if target not in pred:
        return None
    chosen = []
    s = target
    while pred[s] is not None:
        s, cid = pred[s]
        chosen.append(cid)
    return frozenset(chosen)


def _current(placements, cid: int, size: int, ell: int) -> tuple[int, ...]:
    """Per-server count of a component's vertices right now.

    ``placements[cid]`` is either a server index (whole component there) or a
    per-server count vector (component currently split, e.g. just merged).
    """
    if placements is None:
        return (0,) * ell
    p = placements[cid]
    if isinstance(p, (int, np.integer)):
        out = [0] * ell
        out[int(p)] = size
        return tuple(out)
    return tuple(int(x) for x in p)


def _home(placements, cid: int, size: int, ell: int) -> int | None:
    if placements is None:
        return None
    cur = _current(placements, cid, size, ell)
    return max(range(ell), key=lambda j: (cur[j], -j))


def _move_costs(items, counts, placements, n) -> np.ndarray:
    """Cost of putting each component on each server.

    Primary term: vertices that would sit away from their initial server.
    Secondary term (tie-break): vertices that would have to move right now.
    """
    ell = len(counts[items[0][0]])
    big = n + 1
    cost = np.empty((len(items), ell), dtype=np.int64)
    for i, (cid, size) in enumerate(items):
        c = counts[cid]
        cur = _current(placements, cid, size, ell)
        for j in range(ell):
            cost[i, j] = big * (size - c[j]) + (size - cur[j])
    return cost


def cheap_balanced_two(sizes, initial_counts, placements=None) -> dict[int, int] | None:
    """Two-server balanced split minimizing vertex moves from the initial assignment.

    Same subset-sum recursion as :func:`dp_balanced_two` but each reachable sum
    keeps the cheapest way to reach it. ``initial_counts[c]`` holds how many of
    component ``c``'s vertices started on server 0 and server 1; ties on that
    count are broken by fewer moves from ``placements``.
    """
    items = _pairs(sizes)
    n = sum(s for _, s in items)
    if n % 2:
        return None
    target = n // 2
    cost = _move_costs(items, initial_counts, placements, n)
    base = int(cost[:, 1].sum())
    delta = cost[:, 0] - cost[:, 1]  # extra cost when placed on server 0
    inf = np.iinfo(np.int64).max // 4
    best = np.full(target + 1, inf, dtype=np.int64)
    best[0] = 0
    take = np.zeros((len(items), target + 1), dtype=bool)
    for i, (_, w) in enumerate(items):
        if w > target:
            continue
        cand = best[:-w] + delta[i]
        better = (best[:-w] < inf) & (cand < best[w:])
        take[i, w:] = better
        best[w:] = np.where(better, cand, best[w:])
    if best[target] >= inf:
        return None
    out = {}
    s = target
    for i in range(len(items) - 1, -1, -1):
        cid, w = items[i]
        if take[i, s]:
            out[cid] = 0
            s -= w
        else:
            out[cid] = 1
    assert s == 0 and base + best[target] >= 0
    return out


def exact_balanced_multi(sizes, ell: int, n: int) -> list[list[int]] | None:
    """Split components into ``ell`` groups of exactly n/ell vertices each.

    Depth-first branch and bound: items in decreasing size, a bin is skipped
    when the item does not fit or when an earlier bin with the same load was
    already tried (equal-load bins are interchangeable). Failed
    ``(depth, sorted loads)`` states are memoized.
    """
    items = sorted(_pairs(sizes), key=lambda p: (-p[1], p[0]))
    if n % ell or sum(s for _, s in items) != n:
        raise BadParameters("sizes must sum to n and ell must divide n")
    target = n // ell
    if items and items[0][1] > target:
        return None
    q = len(items)
    # index of the first item from which all remaining sizes are 1
    tail = q
    while tail > 0 and items[tail - 1][1] == 1:
        tail -= 1

    loads = [0] * ell
    placed = [-1] * q
    next_bin = [0] * (q + 1)
    failed: set[tuple[int, tuple[int, ...]]] = set()
    i = 0
    while i < tail:
        size = items[i][1]
        j = ell
        if next_bin[i] > 0 or (i, tuple(sorted(loads))) not in failed:
            for cand in range(next_bin[i], ell):
                if loads[cand] + size > target:
                    continue
                if loads[cand] in loads[:cand]:
                    continue  # an equal-load bin was (or will be) tried first
                j = cand
                break
        if j < ell:
            loads[j] += size
            placed[i] = j
            next_bin[i] = j + 1
            i += 1
            next_bin[i] = 0
            continue
        # exhausted item i under the current loads; backtrack
        failed.add((i, tuple(sorted(loads))))
        i -= 1
        if i < 0:
            return None
        loads[placed[i]] -= items[i][1]
        placed[i] = -1
    # only unit items remain; they exactly fill the residual capacity
    j = 0
    for k in range(tail, q):
        while loads[j] == target:
            j += 1
        placed[k] = j
        loads[j] += 1
    groups: list[list[int]] = [[] for _ in range(ell)]
    for k, (cid, _) in enumerate(items):
        groups[placed[k]].append(cid)
    return groups


def map_groups_to_servers(groups, sizes, placements=None) -> dict[int, int]:
    """Assign each group to a distinct server, keeping as many vertices in place as possible."""
    ell = len(groups)
    size_of = dict(_pairs(sizes))
    if placements is None:
        return {c: j for j, g in enumerate(groups) for c in g}
    stay = np.zeros((ell, ell), dtype=np.int64)
    for g, members in enumerate(groups):
        for c in members:
            stay[g] += _current(placements, c, size_of[c], ell)
    rows, cols = linear_sum_assignment(stay, maximize=True)
    return {c: int(cols[g]) for g in rows for c in groups[g]}


EXACT_MAX_N = 64


def _aggregate(items, initial_counts, placements, ell, n):
    """Group interchangeable components and price every (type, server) pair."""
    types: dict[tuple, list[int]] = defaultdict(list)
    for cid, size in items:
        types[(size, tuple(initial_counts[cid]), _current(placements, cid, size, ell))].append(cid)
    keys = sorted(types)
    big = n + 1
    cost = np.array(
        [[big * (size - counts[j]) + (size - cur[j]) for j in range(ell)] for size, counts, cur in keys],
        dtype=np.int64,
    )
    mult = np.array([len(types[k]) for k in keys], dtype=np.int64)
    return keys, types, cost, mult


def _balance_constraints(keys, mult, ell, target):
    t = len(keys)
    rows_cover = np.zeros((t, t * ell))
    rows_load = np.zeros((ell, t * ell))
    for a, (size, _, _) in enumerate(keys):
        rows_cover[a, a * ell:(a + 1) * ell] = 1
        rows_load[np.arange(ell), a * ell + np.arange(ell)] = size
    return rows_cover, rows_load


def _expand(keys, types, y) -> dict[int, int]:
    out = {}
    for a, key in enumerate(keys):
        cids = types[key]
        pos = 0
        # members of one type are interchangeable; hand out servers in index order
        for j, k in enumerate(y[a]):
            for cid in cids[pos:pos + k]:
                out[cid] = j
            pos += k
    return out


def cheap_balanced_multi(sizes, initial_counts, ell: int, placements=None, exact: bool | None = None) -> dict[int, int] | None:
    """Perfectly balanced placement with few vertices away from their initial server.

    ``initial_counts[c][j]`` is how many vertices of component ``c`` started on
    server ``j``. Putting ``c`` on server ``j`` costs ``size - initial_counts[c][j]``;
    ties are broken by fewer moves away from ``placements``.

    Components with identical (size, counts, placement) are interchangeable and
    are aggregated into integer variables. With ``exact`` (the default up to
    ``EXACT_MAX_N`` vertices) the aggregated problem is solved to optimality as a
    MILP. Otherwise :func:`_lp_rounding` is used: its result is perfectly
    balanced but only near-minimal.
    """
    items = _pairs(sizes)
    n = sum(s for _, s in items)
    if n % ell:
        return None
    target = n // ell
    if ell == 1:
        return {c: 0 for c, _ in items}
    if any(s > target for _, s in items):
        return None
    if exact is None:
        exact = n <= EXACT_MAX_N
    keys, types, cost, mult = _aggregate(items, initial_counts, placements, ell, n)
    if not exact:
        return _lp_rounding(items, keys, types, cost, mult, ell, target)
    rows_cover, rows_load = _balance_constraints(keys, mult, ell, target)
    res = milp(
        cost.ravel().astype(float),
        constraints=[
            LinearConstraint(rows_cover, mult, mult),
            LinearConstraint(rows_load, target, target),
        ],
        integrality=np.ones(cost.size),
        bounds=Bounds(0, np.repeat(mult, ell).astype(float)),
        options={"mip_rel_gap": 0.0, "presolve": True},
    )
    if res.status != 0 or res.x is None:
        return None
    return _expand(keys, types, np.rint(res.x).astype(int).reshape(len(keys), ell))


def _lp_rounding(items, keys, types, cost, mult, ell, target) -> dict[int, int] | None:
    """Round the transportation relaxation, then repair the loads exactly.

    1. Solve the LP relaxation of the aggregated problem.
    2. Keep its integral part; components of fractional types stay unplaced.
    3. Pack the unplaced components exactly into the residual capacities,
       cheapest server first. If that is impossible, release more components
       (smallest first, doubling the batch) and retry; once everything is
       released this is the exact feasibility search.
    4. Improve by swapping equal-size components between servers.
    """
    t = len(keys)
    rows_cover, rows_load = _balance_constraints(keys, mult, ell, target)
    res = linprog(
        cost.ravel().astype(float),
        A_eq=np.vstack([rows_cover, rows_load]),
        b_eq=np.concatenate([mult, np.full(ell, target)]).astype(float),
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        return None
    y = np.floor(res.x.reshape(t, ell) + 1e-7).astype(int)
    placement = _expand(keys, types, y)
    size_of = dict(items)
    cost_of = {}
    for a, key in enumerate(keys):
        for cid in types[key]:
            cost_of[cid] = cost[a]
    loads = [0] * ell
    for cid, j in placement.items():
        loads[j] += size_of[cid]

    released = [cid for cid, _ in items if cid not in placement]
    # candidates for release: placed components, smallest first
    pool = sorted(placement, key=lambda c: (size_of[c], c))
    batch = ell
    while True:
        residual = [target - x for x in loads]
        if min(residual) >= 0:
            fill = _pack(released, size_of, cost_of, residual, budget=None if not pool else 20000)
            if fill is not None:
                placement.update(fill)
                break
        if not pool:
            return None
        take, pool = pool[:batch], pool[batch:]
        for cid in take:
            loads[placement.pop(cid)] -= size_of[cid]
        released.extend(take)
        batch *= 2
    _swap_improve(placement, size_of, cost_of, ell)
    return placement


def _pack(cids, size_of, cost_of, residual, budget=None) -> dict[int, int] | None:
    """Place ``cids`` so every bin is filled exactly; ``None`` if impossible or over budget.

    Depth-first, largest item first, cheapest bin first. Failed
    ``(depth, sorted residuals)`` states are memoized (feasibility does not
    depend on which bin has which residual).
    """
    order = sorted(cids, key=lambda c: (-size_of[c], c))
    ell = len(residual)
    res = list(residual)
    if sum(res) != sum(size_of[c] for c in order):
        return None
    prefs = [sorted(range(ell), key=lambda j, c=c: (cost_of[c][j], j)) for c in order]
    choice = [0] * len(order)
    placed = [-1] * len(order)
    failed: set = set()
    nodes = 0
    i = 0
    while i < len(order):
        nodes += 1
        if budget is not None and nodes > budget:
            return None
        size = size_of[order[i]]
        j = None
        if choice[i] > 0 or (i, tuple(sorted(res))) not in failed:
            for k in range(choice[i], ell):
                b = prefs[i][k]
                if res[b] >= size:
                    j, choice[i] = b, k + 1
                    break
        if j is not None:
            res[j] -= size
            placed[i] = j
            i += 1
            if i < len(order):
                choice[i] = 0
            continue
        failed.add((i, tuple(sorted(res))))
        i -= 1
        if i < 0:
            return None
        res[placed[i]] += size_of[order[i]]
        placed[i] = -1
    return {c: placed[k] for k, c in enumerate(order)}


def _swap_improve(placement, size_of, cost_of, ell, rounds: int = 4):
    """Swap equal-size components on different servers while that lowers the cost."""
    by_size: dict[int, list[int]] = defaultdict(list)
    for cid in sorted(placement):
        by_size[size_of[cid]].append(cid)
    for _ in range(rounds):
        improved = False
        for group in by_size.values():
            if len(group) < 2:
                continue
            for x in range(len(group)):
                a = group[x]
                for y in range(x + 1, len(group)):
                    b = group[y]
                    i, j = placement[a], placement[b]
                    if i == j:
                        continue
                    ca, cb = cost_of[a], cost_of[b]
                    if ca[j] + cb[i] < ca[i] + cb[j]:
                        placement[a], placement[b] = j, i
                        improved = True
        if not improved:
            break


def approx_balanced_multi(sizes, ell: int, n: int, eps_prime, placements=None, fallback: bool = True) -> dict[int, int]:
    """Placement with every server load at most floor((1 + eps_prime) * n / ell).

    First-fit decreasing into bins of that capacity; a component stays on its
    current server (``placements``) when it fits there. If the heuristic fails
    and ``fallback`` is set, an exact balanced partition is used instead.
    """
    items = sorted(_pairs(sizes), key=lambda p: (-p[1], p[0]))
    if sum(s for _, s in items) != n:
        raise BadParameters("sizes must sum to n")
    bound = int((1 + Fraction(eps_prime)) * Fraction(n, ell))
    loads = [0] * ell
    out: dict[int, int] = {}
    for cid, size in items:
        choice = None
        home = _home(placements, cid, size, ell)
        if home is not None and loads[home] + size <= bound:
            choice = home
        else:
            for j in range(ell):
                if loads[j] + size <= bound:
                    choice = j
                    break
        if choice is None:
            if not fallback:
                raise ApproximationFailed(f"component {cid} of size {size} fits nowhere under {bound}")
            groups = exact_balanced_multi(items, ell, n)
            if groups is None:
                raise ApproximationFailed("no balanced partition exists to fall back on")
            return map_groups_to_servers(groups, items, placements)
        out[cid] = choice
        loads[choice] += size
    return out


def group_loads(placement: Mapping[int, int], sizes, ell: int) -> list[int]:
    loads = [0] * ell
    for cid, size in _pairs(sizes):
        loads[placement[cid]] += size
    return loads


def size_multiset(forest, roots: Iterable[int] | None = None) -> list[tuple[int, int]]:
    roots = forest.roots() if roots is None else roots
    return [(r, forest.size(r)) for r in roots]
