from fractions import Fraction

import pytest

from corpus import random_case
from oracles import brute_off_moves
from repart.core import Instance, is_perfect_partitioning, is_valid
from repart.errors import BadParameters, SameServer
from repart.partition2 import MajorityVoting, delta_two
from repart.partition_multi import (
    CombinedMultiServer, RecursiveMajorityVoting, SlrMulti, approx_offline, build_tree, check_stopping_criterion,
    descend, lca, stopping_threshold,
)


def blocks(n, ell):
    return [v // (n // ell) for v in range(n)]


def test_tree_shape_eight_servers():
    t = build_tree(8)
    assert t.internal_nodes() == list(range(1, 8))
    assert list(t.servers(7)) == [6, 7]
    assert list(t.servers(2)) == [0, 1, 2, 3]


def test_tree_small_cases():
    t = build_tree(2)
    assert t.internal_nodes() == [1] and t.children[1] == (2, 3)
    t3 = build_tree(3)
    left, right = t3.children[1]
    assert list(t3.servers(left)) == [0, 1] and list(t3.servers(right)) == [2]
    with pytest.raises(BadParameters):
        build_tree(1)


def test_lca():
    t = build_tree(8)
    assert lca(t, 0, 3) == 2
    assert lca(t, 6, 7) == 7
    assert lca(t, 0, 7) == 1
    with pytest.raises(SameServer):
        lca(t, 2, 2)


def test_descend_follows_unanimous_labels_and_ties_left():
    t = build_tree(8)
    hist = [0] * 8
    hist[5] = 3
    assert descend(t, hist) == 5
    assert descend(t, [1, 0, 0, 0, 0, 0, 0, 1]) == 0


def test_approx_offline_identity_and_two_servers():
    n = 16
    inst = Instance(n, 4, 0, 2, blocks(n, 4), [range(i * 4, i * 4 + 4) for i in range(4)])
    asg, moved = approx_offline(inst)
    assert moved == 0 and asg.server_of == list(inst.initial)
    for seed in range(20):
        inst, _ = random_case(16, 2, 0, seed)
        assert approx_offline(inst)[1] <= 4 * delta_two(inst)


@pytest.mark.parametrize("seed", range(10))
def test_approx_within_twice_brute_force(seed):
    inst, seq = random_case(12, 4, 0, seed)
    _, moved = approx_offline(inst)
    assert moved <= 2 * brute_off_moves(inst.initial, inst.ground_truth, 4)
    # the same placement is recovered from the request sequence alone
    assert approx_offline(inst.online_view(), seq)[1] == moved


def test_threshold():
    assert stopping_threshold(Instance(64, 4, Fraction(1, 2), 2, blocks(64, 4))) == 4
    with pytest.raises(BadParameters):
        RecursiveMajorityVoting(Instance(16, 4, Fraction(1, 4), 2, blocks(16, 4)))


def test_stopping_criterion_threshold_crossing():
    inst = Instance(16, 2, Fraction(1, 4), 2, blocks(16, 2))  # theta = 2
    alg = RecursiveMajorityVoting(inst)
    assert alg.theta == 2
    assert not check_stopping_criterion(alg, 0, 1)
    alg.guarded_move(0, 1, "test")  # one S0-labeled vertex now on S1
    assert alg.foreign[alg.tree.leaf(1)] == 1
    assert check_stopping_criterion(alg, 1, 1)
    # sending the stray vertex home only lowers counts
    assert not check_stopping_criterion(alg, 0, 0)


def test_rmv_collocated_merge_only():
    alg = RecursiveMajorityVoting(Instance(16, 2, Fraction(1, 2), 2, blocks(16, 2)))
    assert alg.process((0, 1)) == ("merge_only",)
    assert alg.ledger.moved_vertices == 0


def test_rmv_two_servers_tie_goes_left_unlike_mv():
    inst = Instance(8, 2, Fraction(1, 2), 2, blocks(8, 2))
    rmv = RecursiveMajorityVoting(inst).run([(0, 4)])
    mv = MajorityVoting(inst).run([(0, 4)])
    assert rmv.assignment.server_of[0] == rmv.assignment.server_of[4] == 0
    assert mv.assignment.server_of[0] == mv.assignment.server_of[4] == 1


def test_rmv_votes_when_reaching_block_size():
    inst = Instance(12, 2, Fraction(1, 2), 2, blocks(12, 2))  # block 6, theta 3
    events = []
    alg = RecursiveMajorityVoting(inst, listener=lambda e, p: events.append(e))
    alg.run([(0, 1), (2, 3), (0, 2), (7, 8)])
    events.clear()
    alg.process((0, 7))  # 4 + 2 = 6: no power of two crossed, but the block size is reached
    assert "vote" in events


def test_combined_identity_is_free():
    n, ell = 32, 4
    inst = Instance(n, ell, Fraction(1, 2), 2, blocks(n, ell), [range(i * 8, i * 8 + 8) for i in range(ell)])
    seq = [(v, v + 1) for v in range(n - 1) if (v + 1) % 8]
    alg = CombinedMultiServer(inst.online_view()).run(seq)
    assert alg.ledger.total(2) == 0 and is_perfect_partitioning(alg.assignment, inst)


def test_combined_after_stop_is_valid_and_perfect():
    inst, seq = random_case(64, 4, Fraction(1, 4), seed=1)
    alg = CombinedMultiServer(inst.online_view()).run(seq)
    assert alg.stopped and alg.switched_at is not None
    assert is_valid(alg.assignment, inst) and is_perfect_partitioning(alg.assignment, inst)


def test_slr_multi_steps():
    inst = Instance(8, 4, Fraction(1, 2), 2, blocks(8, 4))
    alg = SlrMulti(inst)
    assert alg.process((0, 2)) == ("small_to_large",) and alg.ledger.moved_vertices == 1
    tight = SlrMulti(Instance(8, 4, 0, 2, blocks(8, 4)))
    assert tight.process((0, 2)) == ("rebalance",)
    assert tight.assignment.load == [2] * 4


@pytest.mark.parametrize("seed", range(5))
def test_poly_mode_load_bound(seed):
    inst, seq = random_case(64, 4, Fraction(1, 2), seed)
    alg = SlrMulti(inst.online_view(), mode="poly").run(seq)
    bound = (1 + Fraction(1, 4)) * 16
    assert all(max(loads) <= bound for loads in alg.post_rebalance_loads)
    assert is_perfect_partitioning(alg.assignment, inst)


def test_short_module_name_aliases_the_same_objects():
    from repart import partition_multi, partitionL

    assert partitionL.CombinedMultiServer is partition_multi.CombinedMultiServer
