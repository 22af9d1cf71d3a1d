"""Offline optimum and competitive ratios."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import CostLedger, Instance
from .errors import InvalidInstance, OffIsZero

BRUTE_FORCE_MAX_ELL = 8


@dataclass(frozen=True)
class OffResult:
    """Optimal offline placement: ``matching[i]`` is the server ground-truth set ``i`` ends on."""

    moved_vertices: int
    cost: Fraction
    matching: tuple[int, ...]


def overlap_matrix(instance: Instance) -> np.ndarray:
    """``M[i, j]`` = number of vertices of ground-truth set ``i`` initially on server ``j``."""
    if instance.ground_truth is None:
        raise InvalidInstance("instance has no ground truth")
    ell = instance.ell
    m = np.zeros((ell, ell), dtype=np.int64)
    for i, part in enumerate(instance.ground_truth):
        for v in part:
            m[i, instance.initial[v]] += 1
    return m


def off_optimal(instance: Instance, method: str = "auto") -> OffResult:
    """Cheapest way to turn the initial assignment into a perfect partitioning.

    All moves happen before the first request, so the cost is pure moving
    cost. ``method='brute'`` tries every bijection (the first optimum in
    lexicographic order wins); ``'assignment'`` uses a linear assignment
    solver; ``'auto'`` picks brute force for up to eight servers.
    """
    m = overlap_matrix(instance)
    ell, block = instance.ell, instance.block
    if method == "auto":
        method = "brute" if ell <= BRUTE_FORCE_MAX_ELL else "assignment"
    if method == "brute":
        perms = np.array(list(permutations(range(ell))), dtype=np.int64)
        kept = m[np.arange(ell), perms].sum(axis=1)
        best = int(np.argmax(kept))  # argmax returns the first maximum
        matching = tuple(int(j) for j in perms[best])
        stay = int(kept[best])
    elif method == "assignment":
        rows, cols = linear_sum_assignment(m, maximize=True)
        matching = tuple(int(c) for c in cols[np.argsort(rows)])
        stay = int(m[np.arange(ell), list(matching)].sum())
    else:
        raise ValueError(f"unknown method {method!r}")
    moved = ell * block - stay
    return OffResult(moved, instance.alpha * moved, matching)


def competitive_ratio(ledger: CostLedger, off: OffResult, alpha) -> Fraction:
    """ALG / OFF as an exact rational; 1 when both are zero."""
    alg = ledger.total(alpha)
    if off.cost == 0:
        if alg == 0:
            return Fraction(1)
        raise OffIsZero("offline optimum is zero but the online algorithm paid")
    return Fraction(alg) / off.cost
