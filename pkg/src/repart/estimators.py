"""scikit-learn style wrappers.

``fit`` consumes a request sequence given as an ``(m, 2)`` array of vertex
pairs; ``predict`` maps vertices to servers.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .components import ComponentForest
from .core import Instance
from .oracle import off_optimal
from .partition2 import CombinedTwoServer, MajorityVoting, SmallLargeRebalance
from .partition_multi import CombinedMultiServer, RecursiveMajorityVoting, approx_offline
from .validation import block_initial, check_edges, check_initial, check_rational

ALGORITHMS = {
    "slr": lambda inst, eps_prime: SmallLargeRebalance(inst, mode="plain"),
    "slr-cheap": lambda inst, eps_prime: SmallLargeRebalance(inst, mode="cheap"),
    "slr-poly": lambda inst, eps_prime: SmallLargeRebalance(inst, mode="poly", eps_prime=eps_prime),
    "mv": lambda inst, eps_prime: MajorityVoting(inst),
    "combined2": lambda inst, eps_prime: CombinedTwoServer(inst),
    "rmv": lambda inst, eps_prime: RecursiveMajorityVoting(inst),
    "combinedL": lambda inst, eps_prime: CombinedMultiServer(inst),
}


def make_algorithm(name: str, instance: Instance, eps_prime=None):
    try:
        factory = ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    return factory(instance, eps_prime)


def _build_instance(n_servers, epsilon, alpha, initial, n_vertices, edges, ground_truth=None):
    if initial is None:
        n = n_vertices if n_vertices is not None else (int(edges.max()) + 1 if len(edges) else n_servers)
        initial = block_initial(n, n_servers)
    else:
        initial = check_initial(initial, n_servers)
    return Instance(
        len(initial), n_servers, check_rational(epsilon, "epsilon"), check_rational(alpha, "alpha"),
        initial, ground_truth,
    )


class OnlinePartitioner(BaseEstimator):
    """Run an online repartitioning algorithm over a request sequence.

    Parameters
    ----------
    algorithm : one of ``slr``, ``slr-cheap``, ``slr-poly``, ``mv``,
        ``combined2``, ``rmv``, ``combinedL``
    n_servers : number of servers
    epsilon, alpha : exact rationals (ints, Fractions or ``"a/b"`` strings)
    eps_prime : load slack for ``slr-poly`` (defaults to epsilon/2)
    n_vertices : vertex count when no initial assignment is passed to ``fit``

    Attributes
    ----------
    assignment_ : ndarray of the server of every vertex
    ledger_ : the run's :class:`~repart.core.CostLedger`
    algorithm_ : the underlying online algorithm object
    """

    def __init__(self, algorithm="combinedL", n_servers=2, epsilon="1/4", alpha=2, eps_prime=None, n_vertices=None):
        self.algorithm = algorithm
        self.n_servers = n_servers
        self.epsilon = epsilon
        self.alpha = alpha
        self.eps_prime = eps_prime
        self.n_vertices = n_vertices

    def fit(self, X, y=None, initial=None):
        edges = check_edges(X)
        inst = _build_instance(self.n_servers, self.epsilon, self.alpha, initial, self.n_vertices, edges)
        self.algorithm_ = make_algorithm(self.algorithm, inst, self.eps_prime)
        self.instance_ = inst
        return self.partial_fit(edges)

    def partial_fit(self, X, y=None):
        check_is_fitted(self, "algorithm_")
        edges = check_edges(X, self.instance_.n)
        for u, v in edges:
            self.algorithm_.process((int(u), int(v)))
        self.assignment_ = np.asarray(self.algorithm_.assignment.server_of)
        self.ledger_ = self.algorithm_.ledger
        return self

    def predict(self, X):
        """Current server of each vertex in ``X``."""
        check_is_fitted(self, "assignment_")
        idx = np.asarray(X, dtype=np.int64).ravel()
        return self.assignment_[idx]

    def transform(self, X):
        """Servers of both endpoints, shape ``(m, 2)``."""
        check_is_fitted(self, "assignment_")
        edges = check_edges(X, self.instance_.n)
        return self.assignment_[edges]

    def total_cost(self):
        check_is_fitted(self, "ledger_")
        return self.ledger_.total(self.instance_.alpha)


class OfflinePartitioner(BaseEstimator):
    """Offline reference placements: ``method='optimal'`` (exact) or ``'approx'`` (tree descent).

    The ground truth is the set of connected components of the edges passed
    to ``fit``; they must form ``n_servers`` equal-size sets.
    """

    def __init__(self, method="optimal", n_servers=2, alpha=2, n_vertices=None):
        self.method = method
        self.n_servers = n_servers
        self.alpha = alpha
        self.n_vertices = n_vertices

    def fit(self, X, y=None, initial=None):
        edges = check_edges(X)
        probe = _build_instance(self.n_servers, 0, self.alpha, initial, self.n_vertices, edges)
        forest = ComponentForest(probe.initial, probe.ell)
        for u, v in edges:
            forest.merge(int(u), int(v))
        inst = probe.with_ground_truth(sorted(forest.components(), key=min))
        self.instance_ = inst
        if self.method == "optimal":
            off = off_optimal(inst)
            owner = inst.component_of()
            self.assignment_ = np.array([off.matching[owner[v]] for v in range(inst.n)])
            self.moved_vertices_ = off.moved_vertices
        elif self.method == "approx":
            asg, moved = approx_offline(inst)
            self.assignment_ = np.asarray(asg.server_of)
            self.moved_vertices_ = moved
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.cost_ = inst.alpha * self.moved_vertices_
        return self

    def predict(self, X):
        check_is_fitted(self, "assignment_")
        return self.assignment_[np.asarray(X, dtype=np.int64).ravel()]
