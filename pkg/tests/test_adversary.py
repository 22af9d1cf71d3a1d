from fractions import Fraction

import pytest

from corpus import random_case
from repart.adversary import (
    gen_inverse_eps, gen_log_rounds, gen_random, inverse_eps_layout, random_instance, wrap_repetition,
)
from repart.core import RequestSequence, is_perfect_partitioning
from repart.errors import BadParameters
from repart.estimators import ALGORITHMS
from repart.oracle import off_optimal
from repart.partition2 import CombinedTwoServer

COMPLETE = ["slr", "slr-cheap", "slr-poly", "mv", "combined2", "combinedL"]


def test_random_singletons_need_no_edges():
    inst = random_instance(4, 4, 0, seed=1)
    assert len(gen_random(inst, seed=1)) == 0


@pytest.mark.parametrize("n,ell", [(8, 2), (24, 3), (64, 8)])
def test_random_sequences_reveal_ground_truth(n, ell):
    inst, seq = random_case(n, ell, 0, seed=n)
    seq.validate(inst)
    assert len(seq) == n - ell


def test_random_is_deterministic():
    a = random_case(32, 4, 0, seed=9)
    b = random_case(32, 4, 0, seed=9)
    assert a == b
    assert gen_random(a[0], seed=1) != gen_random(a[0], seed=2)


def test_repeats_come_after_their_first_occurrence():
    inst = random_instance(16, 2, 0, seed=2)
    seq = gen_random(inst, seed=2, repeat_factor=3)
    assert len(seq) == 3 * 14
    seq.validate(inst)
    base = gen_random(inst, seed=2)
    # the first occurrences, in order, are exactly the plain sequence
    firsts = []
    for e in seq:
        if e not in firsts:
            firsts.append(e)
    assert firsts == list(base)


def test_wrap_repetition():
    seq = RequestSequence(((0, 1), (2, 3)))
    assert wrap_repetition(seq, 1) == seq
    assert len(wrap_repetition(seq, 3)) == 6
    with pytest.raises(BadParameters):
        wrap_repetition(seq, 0)


@pytest.mark.parametrize("name", COMPLETE[3:])
def test_repeats_are_free_for_collocating_algorithms(name):
    inst, seq = random_case(32, 2, Fraction(1, 4), seed=4)
    once = ALGORITHMS[name](inst.online_view(), None).run(seq)
    twice = ALGORITHMS[name](inst.online_view(), None).run(wrap_repetition(seq, 2))
    assert once.ledger.snapshot() == twice.ledger.snapshot()


def test_inverse_eps_layout():
    assert inverse_eps_layout(24, Fraction(1, 6)) == (2, 4)
    with pytest.raises(BadParameters):
        inverse_eps_layout(64, Fraction(1, 4))
    with pytest.raises(BadParameters):
        inverse_eps_layout(10, Fraction(1, 3))


def test_inverse_eps_shape_and_offline_cost():
    inst, seq = gen_inverse_eps(24, Fraction(1, 6))
    seq.validate(inst)
    assert inst.initial == tuple([0] * 12 + [1] * 12)
    # left: four blocks of K+1 = 3; right: C = 12..14, C' = 15..23
    assert seq[:2] == ((0, 1), (1, 2)) and (12, 13) in seq.edges and (22, 23) in seq.edges
    assert sorted(map(len, inst.ground_truth)) == [12, 12]
    # each final set holds K+1 vertices that started on the other server
    assert off_optimal(inst).cost == 2 * inst.alpha * 3


@pytest.mark.parametrize("name", COMPLETE)
def test_inverse_eps_forces_many_moves(name):
    for n, eps in ((24, Fraction(1, 6)), (96, Fraction(1, 16))):
        t = gen_inverse_eps(n, eps, algorithm=lambda i: ALGORITHMS[name](i, None))
        assert t.algorithm.ledger.moved_vertices >= n // 4
        assert is_perfect_partitioning(t.algorithm.assignment, t.instance)


def test_log_rounds_expensive_edges_cost_something():
    steps = []
    def factory(i):
        return CombinedTwoServer(i, observer=lambda a, e, k: steps.append(a.ledger.snapshot()[:2]))
    t = gen_log_rounds(64, Fraction(1, 4), algorithm=factory)
    prev = (0, 0)
    for note, snap in zip(t.annotations, steps):
        if note["expensive"]:
            assert note["split"] and snap != prev
        prev = snap
    assert sum(n["expensive"] for n in t.annotations) > 0
    assert off_optimal(t.instance).cost <= t.instance.alpha * 64 // 2
    t.sequence.validate(t.instance)


def test_log_rounds_rejects_bad_sizes():
    with pytest.raises(BadParameters):
        gen_log_rounds(48, Fraction(1, 4))
