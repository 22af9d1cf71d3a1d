from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from corpus import random_case
from oracles import brute_off_moves
from repart.core import CostLedger, Instance
from repart.errors import OffIsZero
from repart.oracle import OffResult, competitive_ratio, off_optimal
from repart.partition2 import delta_two


def test_identity_costs_nothing():
    inst = Instance(6, 3, 0, 2, [0, 0, 1, 1, 2, 2], [{0, 1}, {2, 3}, {4, 5}])
    off = off_optimal(inst)
    assert off.cost == 0 and off.matching == (0, 1, 2)


def test_rotated_blocks_are_free():
    # each ground-truth pair sits together, just on a shifted server
    inst = Instance(6, 3, 0, 2, [1, 1, 2, 2, 0, 0], [{0, 1}, {2, 3}, {4, 5}])
    off = off_optimal(inst)
    assert off.cost == 0 and off.matching == (1, 2, 0)


def test_three_servers_every_pair_split():
    inst = Instance(6, 3, 0, Fraction(3, 2), [0, 1, 1, 2, 2, 0], [{0, 1}, {2, 3}, {4, 5}])
    off = off_optimal(inst)
    assert off.moved_vertices == brute_off_moves(inst.initial, inst.ground_truth, 3) == 3
    assert off.cost == Fraction(9, 2)


@given(st.integers(0, 10_000), st.sampled_from([(8, 2), (12, 3), (16, 4), (24, 6)]))
def test_methods_agree_with_enumeration(seed, shape):
    n, ell = shape
    inst, _ = random_case(n, ell, 0, seed)
    brute = brute_off_moves(inst.initial, inst.ground_truth, ell)
    assert off_optimal(inst, "brute").moved_vertices == brute
    assert off_optimal(inst, "assignment").moved_vertices == brute


@given(st.integers(0, 10_000), st.sampled_from([8, 16, 32, 64]))
def test_two_servers_pay_twice_delta(seed, n):
    inst, _ = random_case(n, 2, 0, seed)
    assert off_optimal(inst).cost == 2 * inst.alpha * delta_two(inst)


def test_ratio():
    led = CostLedger(comm_units=0, moved_vertices=20)
    assert competitive_ratio(led, OffResult(2, Fraction(4), (0, 1)), 2) == 10
    assert competitive_ratio(CostLedger(), OffResult(0, Fraction(0), (0, 1)), 2) == 1
    with pytest.raises(OffIsZero):
        competitive_ratio(CostLedger(comm_units=1), OffResult(0, Fraction(0), (0, 1)), 2)
