import random
from fractions import Fraction

import pytest

from midr.distribution import Node, RangeDistribution, expected_welfare, sample
from midr.meta_tree import (
    build_tree, evaluate_bottom_up, extract_top_down, meta_optimize, meta_params, meta_value,
)
from midr.oracle import brute_force_range_opt, unweighted_opt
from midr.range_core import make_params, weight
from midr.structured import PreconditionError, warmup_optimize
from midr.valuations import Instance, QueryCounter, additive, single_minded, zero

from suite import EPSILONS, random_instance

HALF = Fraction(1, 2)


def test_build_tree_shapes():
    t2 = build_tree(2)
    assert list(t2.internal_nodes()) == [1] and list(t2.leaves()) == [2, 3]
    t3 = build_tree(3)
    assert t3.n_padded == 4 and t3.bidder(7) == 3  # the padded zero bidder
    t8 = build_tree(8)
    assert len(t8.internal_nodes()) == 7
    assert max(t8.level(k) for k in t8.internal_nodes()) == 3
    assert build_tree(1).n_padded == 2
    with pytest.raises(ValueError):
        build_tree(0)


def test_intervals_split_in_half():
    t = build_tree(8)
    assert t.interval(1) == (0, 7)
    assert t.interval(2) == (0, 3) and t.interval(3) == (4, 7)
    assert t.interval(5) == (2, 3) and t.interval(13) == (5, 5)


def test_root_value_two_single_minded():
    inst = Instance(8, [single_minded(8, 5, 10), single_minded(8, 3, 6)])
    p = meta_params(HALF, 8, 2)
    table = evaluate_bottom_up(inst, p)
    ref = brute_force_range_opt(inst, p)[1]
    assert meta_value(1, 8, table) == ref
    assert meta_value(1, 0, table) == 0
    assert meta_value(2, 5, table, inst) == 10


def test_extract_two_single_minded():
    inst = Instance(8, [single_minded(8, 5, 10), single_minded(8, 3, 6)])
    p = meta_params(HALF, 8, 2)
    dist, welfare, _ = meta_optimize(inst, p)
    assert dist.base == (8, 0)
    assert dist.nodes[0].weight == weight((8, 0), p)
    assert welfare == expected_welfare(dist, inst) == brute_force_range_opt(inst, p)[1]


def test_level_two_nodes_all_single_minded():
    inst = Instance(8, [single_minded(8, 5, 10)] * 4)
    p = meta_params(HALF, 8, 4)
    table = evaluate_bottom_up(inst, p)
    # one child served with all 8 items: t = 3 plus the single-winner bonus
    expect = (1 - p.epsilon_prime) * (1 + 2 * p.delta) ** 4 * 10
    assert meta_value(2, 8, table) == expect == meta_value(3, 8, table)


def test_zero_instance():
    inst = Instance(8, [zero(8)] * 3)
    p = meta_params(HALF, 8, 3)
    table = evaluate_bottom_up(inst, p)
    assert all(c == [(0, 0)] for node in table.candidates.values() for c in node.values())
    dist = extract_top_down(inst, table)
    assert dist.base == (0, 0, 0) and expected_welfare(dist, inst) == 0


def test_one_additive_bidder_among_four():
    inst = Instance(8, [zero(8), additive(8, 1), zero(8), zero(8)])
    p = meta_params(HALF, 8, 4)
    dist, welfare, _ = meta_optimize(inst, p)
    assert dist.base == (0, 8, 0, 0)
    assert welfare >= HALF * 8
    assert welfare == brute_force_range_opt(inst, p)[1]


def test_wrong_params_rejected():
    inst = Instance(8, [zero(8)] * 3)
    with pytest.raises(PreconditionError):
        evaluate_bottom_up(inst, make_params(HALF, 8, 4, "warmup"))
    with pytest.raises(PreconditionError):
        evaluate_bottom_up(inst, meta_params(HALF, 8, 2))


@pytest.mark.parametrize("seed", range(4))
def test_exact_against_brute_force(seed):
    rng = random.Random(seed)
    for _ in range(25):
        n, m = rng.choice([(2, 32), (3, 16), (4, 16), (4, 8), (5, 8)])
        eps = rng.choice(EPSILONS)
        inst = random_instance(rng, n, m)
        p = meta_params(eps, m, n)
        dist, welfare, table = meta_optimize(inst, p)
        assert welfare == brute_force_range_opt(inst, p)[1]
        assert welfare == expected_welfare(dist, inst)
        assert welfare >= (1 - eps) * unweighted_opt(inst)


def test_budget_conservation_and_inclusion_floor():
    rng = random.Random(7)
    for _ in range(20):
        inst = random_instance(rng, 4, 16)
        eps = rng.choice(EPSILONS)
        p = meta_params(eps, 16, 4)
        dist, _, _ = meta_optimize(inst, p)
        assert sum(dist.base) <= 16
        for i in range(4):
            if dist.base[i]:
                assert dist.inclusion_probability(i) >= 1 - eps


def test_node_weights_match_child_splits():
    rng = random.Random(5)
    inst = random_instance(rng, 4, 16)
    p = meta_params(Fraction(1, 4), 16, 4)
    dist, _, _ = meta_optimize(inst, p)
    b = dist.base
    assert [n.weight for n in dist.nodes] == [
        weight((b[0] + b[1], b[2] + b[3]), p), weight((b[0], b[1]), p), weight((b[2], b[3]), p)]


def test_two_bidders_equal_warmup():
    rng = random.Random(6)
    for _ in range(30):
        m = rng.choice([4, 8, 16, 32])
        eps = rng.choice(EPSILONS)
        inst = random_instance(rng, 2, m)
        dist, welfare, _ = meta_optimize(inst, meta_params(eps, m, 2))
        best = warmup_optimize(inst, make_params(eps, m, 2))
        assert (dist.base, welfare) == (best.allocation, best.expected_welfare)


def test_meta_values_monotone():
    rng = random.Random(4)
    inst = random_instance(rng, 4, 32)
    table = evaluate_bottom_up(inst, meta_params(Fraction(1, 10), 32, 4))
    for k in (1, 2, 3):
        vals = [meta_value(k, s, table) for s in range(33)]
        assert vals == sorted(vals)


def test_query_bound_at_scale():
    from midr.bench import synthetic_instance
    m, n = 2 ** 14, 16
    inst = synthetic_instance(m, n, seed=1)
    p = meta_params(Fraction(1, 4), m, n)
    meta_optimize(inst, p)
    queries = QueryCounter(inst).total()
    # far below m * n: only significant-breakpoint neighborhoods are queried
    assert queries < m * n / 10


# ------------------------------------------------------------ distributions


def test_expected_welfare_single_node():
    inst = Instance(8, [single_minded(8, 5, 10), single_minded(8, 3, 6)])
    dist = RangeDistribution.single((5, 3), HALF)
    assert expected_welfare(dist, inst) == 8


def test_expected_welfare_unit_weights():
    inst = Instance(8, [additive(8, 1), additive(8, 2)])
    dist = RangeDistribution((3, 4), (Node(0, 1, Fraction(1)),))
    assert expected_welfare(dist, inst) == 11
    assert expected_welfare(dist, Instance(8, [zero(8), zero(8)])) == 0


def test_sample_degenerate_cases():
    d1 = RangeDistribution((3, 4), (Node(0, 1, Fraction(1)),))
    assert all(sample(d1, s) == (3, 4) for s in range(20))
    d0 = RangeDistribution((0, 0), (Node(0, 1, HALF),))
    assert sample(d0, 3) == (0, 0)


def test_sample_deterministic_and_feasible():
    d = RangeDistribution((1, 2, 3, 4), (Node(0, 3, Fraction(3, 4)), Node(0, 1, HALF),
                                         Node(2, 3, Fraction(9, 10))))
    assert sample(d, 7) == sample(d, 7)
    for s in range(200):
        draw = sample(d, s)
        assert all(x in (0, b) for x, b in zip(draw, d.base))
        if draw[0]:
            assert draw[1]  # nested: siblings under one node share its coin


def test_sample_frequency_half():
    d = RangeDistribution.single((1, 1), HALF)
    hits = sum(sample(d, s)[0] == 1 for s in range(20000))
    assert abs(hits / 20000 - 0.5) < 5 * (0.25 / 20000) ** 0.5
