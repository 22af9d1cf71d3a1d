"""The thirteen acceptance criteria, each timed against its limit.

Every test appends one ``PASS``/``FAIL`` line to the terminal summary and
fails if either the check or the time limit fails.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from corpus import random_case
from oracles import ReferenceUnionFind, balanced_exists, min_away
from repart.adversary import gen_inverse_eps, gen_log_rounds, inverse_eps_layout, random_instance
from repart.apps import UnionFindFacade
from repart.core import is_perfect_partitioning, is_valid
from repart.distsim import DistributedRun
from repart.oracle import competitive_ratio, off_optimal
from repart.partition2 import CombinedTwoServer, MajorityVoting, SmallLargeRebalance, delta_two
from repart.partition_multi import (
    CombinedMultiServer, RecursiveMajorityVoting, SlrMulti, approx_offline, stopping_threshold,
)
from repart.rebalance import (
    cheap_balanced_multi, cheap_balanced_two, dp_balanced_two, exact_balanced_multi, group_loads,
)

pytestmark = pytest.mark.acceptance

EPS_CAPACITY = (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2) - Fraction(1, 16))


def criterion(number, title, limit, body):
    t0 = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - t0
    in_time = elapsed < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    ACCEPTANCE_LINES.append(
        f"criterion {number}: {verdict} {title} ({detail}; {elapsed:.2f}s of {limit}s)"
    )
    assert ok, detail
    assert in_time, f"took {elapsed:.2f}s, limit {limit}s"


def capacity_corpus():
    """200 instances over eps x ell x n with n <= 256, each with a positive stopping threshold."""
    out = []
    for i in range(200):
        ell = (2, 4, 8)[i % 3]
        eps = EPS_CAPACITY[(i // 3) % 3]
        n = (64, 128, 256)[(i // 9) % 3]
        probe = random_instance(n, ell, eps, seed=0)
        while stopping_threshold(probe) < 1:
            n *= 2
            probe = random_instance(n, ell, eps, seed=0)
        assert n <= 256
        out.append(random_case(n, ell, eps, 1000 + i))
    return out


def test_criterion_01_off_equals_twice_alpha_delta():
    def body():
        rng = random.Random(1)
        bad = 0
        for k in range(300):
            n = rng.randrange(8, 65, 2)
            inst, _ = random_case(n, 2, 0, k)
            if off_optimal(inst).cost != 2 * inst.alpha * delta_two(inst):
                bad += 1
        return bad == 0, f"{300 - bad}/300 instances exact"
    criterion(1, "OFF = 2*alpha*Delta on two servers", 5, body)


def test_criterion_02_approx_within_twice_off():
    def body():
        bad = 0
        for k in range(150):
            ell = (2, 4, 8)[k % 3]
            n = ell * random.Random(k).randint(1, 64 // ell)
            inst, _ = random_case(n, ell, 0, 2000 + k)
            if approx_offline(inst)[1] > 2 * off_optimal(inst).moved_vertices:
                bad += 1
        return bad == 0, f"{150 - bad}/150 within 2x"
    criterion(2, "tree-descent placement moves <= 2 x optimal moves", 10, body)


def test_criterion_03_majority_voting_augmentation():
    def body():
        bad = 0
        for k in range(150):
            n = (8, 16, 32, 64)[k % 4]
            inst, seq = random_case(n, 2, 0, 3000 + k)
            bound = n // 2 + 4 * delta_two(inst)
            worst = [0]

            def watch(alg, edge, kinds):
                worst[0] = max(worst[0], max(alg.assignment.load))
            MajorityVoting(inst.online_view(), observer=watch).run(seq)
            bad += worst[0] > bound
        return bad == 0, f"{150 - bad}/150 runs within n/2 + 4*Delta"
    criterion(3, "majority voting peak load <= n/2 + 4*Delta", 10, body)


def test_criterion_04_capacity_safety():
    def body():
        invalid = imperfect = runs = 0
        for inst, seq in capacity_corpus():
            algs = [CombinedMultiServer]
            if inst.ell == 2:
                algs.insert(0, CombinedTwoServer)
            for cls in algs:
                seen = []
                alg = cls(inst.online_view(), observer=lambda a, e, k: seen.append(is_valid(a.assignment, inst)))
                alg.run(seq)
                runs += 1
                invalid += not all(seen)
                imperfect += not is_perfect_partitioning(alg.assignment, inst)
        return invalid == imperfect == 0, f"{runs} runs, {invalid} invalid, {imperfect} not perfect"
    criterion(4, "combined algorithms stay within capacity and end perfect", 30, body)


def test_criterion_05_unstopped_voting_matches_offline():
    def body():
        collected = mismatched = tried = 0
        k = 0
        while collected < 100:
            ell = (2, 4, 8)[k % 3]
            n = (32, 64, 128)[k % 3]
            inst, seq = random_case(n, ell, Fraction(3, 4), 5000 + k, swaps=k % 4)
            k += 1
            tried += 1
            alg = RecursiveMajorityVoting(inst.online_view()).run(seq)
            if alg.stopped:
                continue
            collected += 1
            mismatched += alg.assignment != approx_offline(inst)[0]
        return mismatched == 0, f"{collected - mismatched}/{collected} unstopped runs equal ({tried} drawn)"
    criterion(5, "unstopped recursive voting ends at the offline placement", 10, body)


def test_criterion_06_rebalance_counts():
    def body():
        worst2 = worstl = 0.0
        bad = runs = 0
        for inst, seq in capacity_corpus():
            n, ell, eps = inst.n, inst.ell, inst.epsilon
            if ell == 2:
                count = SmallLargeRebalance(inst.online_view()).run(seq).ledger.rebalance_count
                bound = math.ceil(2 * int(math.log2(n)) / eps) + 1
                worst2 = max(worst2, count / bound)
            else:
                count = SlrMulti(inst.online_view()).run(seq).ledger.rebalance_count
                bound = math.ceil(n * int(math.log2(n)) / int(eps * n / ell)) + 1
                worstl = max(worstl, count / bound)
            runs += 1
            bad += count > bound
        return bad == 0, f"{runs} runs, worst count/bound two-server {worst2:.3f}, multi {worstl:.3f}"
    criterion(6, "rebalance counts within their bounds", 30, body)


def _exhaustive_cases(count=500):
    rng = random.Random(7)
    cases = []
    while len(cases) < count:
        ell = rng.choice([2, 3, 4])
        n = ell * rng.randint(1, 16 // ell)
        q = rng.randint(1, min(n, 10))
        cuts = sorted(rng.sample(range(1, n), q - 1)) if q > 1 else []
        sizes = dict(enumerate(b - a for a, b in zip([0] + cuts, cuts + [n])))
        labels = [v % ell for v in range(n)]
        rng.shuffle(labels)
        counts, pos = {}, 0
        for c, s in sizes.items():
            counts[c] = [labels[pos:pos + s].count(j) for j in range(ell)]
            pos += s
        cases.append((sizes, counts, ell, n))
    return cases


def test_criterion_07_solvers_match_enumeration():
    def body():
        bad = 0
        for sizes, counts, ell, n in _exhaustive_cases():
            exists = balanced_exists(sizes, ell)
            best = min_away(sizes, counts, ell)
            if ell == 2:
                side = dp_balanced_two(sizes, n)
                bad += (side is not None) != exists
                if side is not None:
                    bad += sum(sizes[c] for c in side) != n // 2
                cheap = cheap_balanced_two(sizes, counts)
            else:
                groups = exact_balanced_multi(sizes, ell, n)
                bad += (groups is not None) != exists
                if groups is not None:
                    bad += any(sum(sizes[c] for c in g) != n // ell for g in groups)
                cheap = cheap_balanced_multi(sizes, counts, ell)
            bad += (cheap is not None) != exists
            if cheap is not None:
                bad += group_loads(cheap, sizes, ell) != [n // ell] * ell
                bad += sum(sizes[c] - counts[c][j] for c, j in cheap.items()) != best
        return bad == 0, f"500 cases, {bad} disagreements"
    criterion(7, "balanced-split solvers agree with exhaustive enumeration", 60, body)


def test_criterion_08_inverse_eps_growth():
    def body():
        ratios, off_bad = [], []
        for eps, n in ((Fraction(1, 4), 24), (Fraction(1, 8), 48), (Fraction(1, 16), 96)):
            k, _ = inverse_eps_layout(n, eps)
            t = gen_inverse_eps(n, eps, algorithm=CombinedTwoServer)
            alg = CombinedTwoServer(t.instance.online_view()).run(t.sequence)
            off = off_optimal(t.instance)
            ratio = competitive_ratio(alg.ledger, off, t.instance.alpha)
            ratios.append((eps, float(ratio)))
            if off.cost != t.instance.alpha * (k + 1):
                off_bad.append(f"eps={eps}: OFF={off.cost}, alpha(K+1)={t.instance.alpha * (k + 1)}")
        values = [r for _, r in ratios]
        monotone = all(a < b for a, b in zip(values, values[1:]))
        large = all(r >= Fraction(5, 100) / e for e, r in ratios)
        ok = monotone and large and not off_bad
        shown = ", ".join(f"1/eps={int(1 / e)}: {r:.3f}" for e, r in ratios)
        return ok, f"ratios {shown}; monotone={monotone}, >=0.05/eps={large}; OFF mismatches: {off_bad or 'none'}"
    criterion(8, "1/eps lower-bound construction", 10, body)


def test_criterion_09_log_n_growth():
    def body():
        xs, ys = [], []
        for n in (64, 128, 256, 512, 1024):
            t = gen_log_rounds(n, Fraction(1, 4), algorithm=CombinedTwoServer)
            alg = CombinedTwoServer(t.instance.online_view()).run(t.sequence)
            xs.append(math.log2(n))
            ys.append(float(alg.ledger.total(t.instance.alpha) / (t.instance.alpha * n)))
        c1, c0 = np.polyfit(xs, ys, 1)
        pred = c0 + c1 * np.asarray(xs)
        y = np.asarray(ys)
        r2 = 1 - float(((y - pred) ** 2).sum() / ((y - y.mean()) ** 2).sum())
        return c1 > 0 and r2 >= 0.9, f"c0={c0:.3f} c1={c1:.3f} R^2={r2:.4f}"
    criterion(9, "lg n lower-bound construction", 60, body)


def test_criterion_10_distributed_equivalence_and_traffic():
    def body():
        mismatched = over = bounded = 0
        for k in range(100):
            ell = (2, 4, 8)[k % 3]
            n = (64, 128, 256)[(k // 3) % 3]
            eps = Fraction(1, 2)
            inst, seq = random_case(n, ell, eps, 6000 + k)
            for cls in (CombinedMultiServer, SlrMulti):
                run = DistributedRun(cls(inst.online_view())).run(seq)
                ref = cls(inst.online_view()).run(seq)
                mismatched += run.moves != ref.moves or run.assignment() != ref.assignment
                if ell * ell <= eps * n:
                    bounded += 1
                    over += run.messages.total > 8 * run.messages.move_msgs + 2 * ell
        ok = mismatched == 0 and over == 0
        return ok, f"200 runs, {mismatched} move-sequence mismatches, {over}/{bounded} over the traffic bound"
    criterion(10, "distributed runs match centralized runs; traffic bounded", 30, body)


def test_criterion_11_poly_balancing_bound():
    def body():
        bad = rebalances = 0
        for k in range(100):
            ell = (2, 4, 8)[k % 3]
            eps = (Fraction(1, 8), Fraction(1, 4))[k % 2]
            n = 128
            inst, seq = random_case(n, ell, eps, 7000 + k)
            alg = SlrMulti(inst.online_view(), mode="poly", eps_prime=eps / 2).run(seq)
            limit = (1 + eps / 2) * Fraction(n, ell)
            rebalances += len(alg.post_rebalance_loads)
            bad += any(max(loads) > limit for loads in alg.post_rebalance_loads)
        return bad == 0, f"{rebalances} rebalances over 100 runs, {bad} runs over (1+eps/2)n/ell"
    criterion(11, "approximate rebalancing stays within (1+eps/2)n/ell", 10, body)


def test_criterion_12_union_find_equivalence():
    def body():
        wrong = scattered = finds = 0
        for k in range(100):
            ell = (2, 4)[k % 2]
            n = (32, 64, 128)[k % 3]
            inst, seq = random_case(n, ell, Fraction(1, 2), 8000 + k)
            uf = UnionFindFacade(inst.online_view())
            ref = ReferenceUnionFind(n)
            rng = random.Random(k)
            for u, v in seq:
                uf.union(u, v)
                ref.union(u, v)
                for _ in range(2):
                    a, b = rng.randrange(n), rng.randrange(n)
                    finds += 1
                    wrong += (uf.find(a)[0] == uf.find(b)[0]) != ref.same(a, b)
                server_of = uf.alg.assignment.server_of
                scattered += any(len({server_of[x] for x in s}) > 1 for s in ref.sets)
        return wrong == scattered == 0, f"{finds} finds, {wrong} wrong, {scattered} steps with a split set"
    criterion(12, "union-find facade matches a reference union-find", 10, body)


def test_criterion_13_desk_scale_run():
    inst, seq = random_case(4096, 8, Fraction(1, 4), 13)

    def body():
        alg = CombinedMultiServer(inst.online_view()).run(seq)
        ok = is_perfect_partitioning(alg.assignment, inst)
        return ok, f"{len(seq)} requests, {alg.ledger.moved_vertices} moves, {alg.ledger.rebalance_count} rebalances"
    criterion(13, "n=4096, ell=8, eps=1/4 multi-server run", 10, body)
