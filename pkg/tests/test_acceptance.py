"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line; the lines are printed at the end
of the pytest run (see ``conftest.py``) and also when this file is executed
directly.
"""
import math
import random
import time
from fractions import Fraction

import pytest

from midr.bench import bench_one
from midr.distribution import Node, RangeDistribution, sample
from midr.lowerbound import gen_lb_instance
from midr.mechanism import Mechanism, expected_utility
from midr.meta_tree import meta_optimize, meta_params
from midr.oracle import (
    brute_force_breakpoints, brute_force_range_opt, truthfulness_audit, unweighted_opt,
)
from midr.range_core import find_breakpoints, make_params
from midr.structured import warmup_optimize
from midr.valuations import Instance, additive, capped_additive, single_minded

from suite import random_steps, standard_suite

RESULTS = []


def record(number, ok, text):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def suite():
    return standard_suite(200)


@pytest.fixture(scope="module")
def solved(suite):
    """Meta-tree and brute-force optimum for every suite case, with timing."""
    start = time.perf_counter()
    rows = []
    for case_id, inst, eps in suite:
        p = meta_params(eps, inst.m, inst.n)
        dist, welfare, _ = meta_optimize(inst, p)
        ref = brute_force_range_opt(inst, p)[1]
        rows.append((case_id, inst, eps, p, dist, welfare, ref))
    return rows, time.perf_counter() - start


def test_criterion_1_midr_exactness(solved):
    rows, elapsed = solved
    bad = [r[0] for r in rows if r[5] != r[6]]
    ns = sorted({r[1].n for r in rows})
    ms = sorted({r[1].m for r in rows})
    record(1, not bad and len(rows) >= 200 and elapsed < 120,
           f"{len(rows)} instances (n in {ns}, m in {ms}), {len(bad)} mismatches "
           f"against brute force, {elapsed:.1f}s")


def test_criterion_2_approximation(solved):
    rows, _ = solved
    bad = []
    worst = None
    for case_id, inst, eps, _, _, welfare, _ in rows:
        opt = unweighted_opt(inst)
        if welfare < (1 - eps) * opt:
            bad.append(case_id)
        if opt:
            ratio = welfare / opt
            worst = ratio if worst is None else min(worst, ratio)
    record(2, not bad, f"expected welfare >= (1-eps)*OPT on {len(rows)} instances, "
                       f"{len(bad)} failures, worst ratio {float(worst):.4f}")


@pytest.fixture(scope="module")
def audits(suite):
    reports = [truthfulness_audit(inst, eps, "standard-general", 20, seed=j, instance_id=cid)
               for j, (cid, inst, eps) in enumerate(suite)]
    return reports


def test_criterion_3_truthfulness(suite, audits):
    checks = sum(r.checks for r in audits)
    per_bidder = min(r.checks // inst.n for r, (_, inst, _) in zip(audits, suite))
    violations = sum(len(r.violations) for r in audits)
    # mutation: bonus inverted; a low bidder just under the significance
    # threshold profits from overbidding
    crafted = Instance(8, [single_minded(8, 4, 1), single_minded(8, 4, Fraction(1, 400))])
    mutated = truthfulness_audit(crafted, Fraction(1, 2), "standard-general", 20,
                                 seed=0, invert_bonus=True)
    ok = violations == 0 and per_bidder >= 20 and len(mutated.violations) >= 1
    record(3, ok, f"{checks} exact utility comparisons ({per_bidder} misreports per bidder), "
                  f"{violations} violations; mutated rule: {len(mutated.violations)} violations")


def test_criterion_4_ir_and_payments(suite):
    bad_ir = bad_pay = total = 0
    for _, inst, eps in suite:
        out = Mechanism(inst.m, inst.n, eps).run(inst)
        for i, v in enumerate(inst.bidders):
            total += 1
            bad_pay += out.payments[i] < 0
            bad_ir += expected_utility(i, v, out) < 0
    record(4, bad_ir == bad_pay == 0,
           f"{total} bidders: {bad_ir} IR failures, {bad_pay} negative payments")


def test_criterion_5_two_bidder_consistency(solved):
    rows, _ = solved
    checked = bad = 0
    for _, inst, eps, p, dist, welfare, _ in rows:
        if inst.n != 2:
            continue
        checked += 1
        best = warmup_optimize(inst, make_params(p.epsilon_prime, inst.m, 2, "warmup"))
        bad += (dist.base, welfare) != (best.allocation, best.expected_welfare)
    record(5, checked > 0 and bad == 0,
           f"{checked} two-bidder instances, {bad} differ from the structured optimum at eps'")


def test_criterion_6_breakpoints():
    rng = random.Random(606)
    tables = bad = 0
    for j in range(100):
        m = 2 ** rng.randint(1, 12)
        kind = j % 4
        if kind == 0:
            v = additive(m, Fraction(rng.randint(1, 9), rng.randint(1, 9)))
        elif kind == 1:
            v = capped_additive(m, rng.randint(1, 5), rng.randint(1, 5 * m))
        else:
            v = random_steps(rng, m, 30)
        p = make_params(rng.choice([Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)]), m)
        for t in range(p.max_exponent + 1):
            tables += 1
            bad += find_breakpoints(v, 2 ** t, p).entries != \
                brute_force_breakpoints(v, 2 ** t, p).entries
    record(6, bad == 0, f"100 valuations, {tables} (valuation, b) tables, {bad} mismatches")


def test_criterion_7_restricted_lower_bound_family():
    eps = Fraction(1, 10)
    count = bad_support = bad_welfare = 0
    worst = None
    for m in (8, 64, 1024):
        mech = Mechanism(m, 2, eps, "restricted")
        for k in range(1, m):
            lb = gen_lb_instance(m, k, Fraction(1, 100), 1)
            dist, welfare = mech.solve(lb.instance)
            count += 1
            bad_support += dist.base in ((m, 0), (0, m))
            bad_welfare += welfare < (1 - eps) * lb.C
            worst = welfare if worst is None else min(worst, welfare)
    record(7, bad_support == bad_welfare == 0,
           f"{count} I_k instances (m in 8, 64, 1024; every k): {bad_support} all-to-one "
           f"outcomes, {bad_welfare} below 0.9*C, worst welfare {float(worst):.4f}*C")


def test_criterion_8_scalability():
    eps = Fraction(1, 4)
    half = bench_one(2 ** 19, 64, eps)
    full = bench_one(2 ** 20, 64, eps)
    ratio = full.queries / half.queries
    ok = full.seconds < 60 and full.queries <= 10 ** 7 and ratio <= 1.5
    record(8, ok, f"m=2^20, n=64: {full.seconds:.1f}s, {full.queries} distinct queries; "
                  f"queries(2^20)/queries(2^19) = {ratio:.3f}")


def test_criterion_9_sampling():
    w = [Fraction(3, 4), Fraction(1, 2), Fraction(9, 10), Fraction(2, 3),
         Fraction(1, 3), Fraction(7, 8), Fraction(5, 6)]
    nodes = (Node(0, 7, w[0]), Node(0, 3, w[1]), Node(4, 7, w[2]), Node(0, 1, w[3]),
             Node(2, 3, w[4]), Node(4, 5, w[5]), Node(6, 7, w[6]))
    dist = RangeDistribution(tuple(range(1, 9)), nodes)
    draws = 10 ** 5
    hits = [0] * 8
    for seed in range(draws):
        for i, s in enumerate(sample(dist, seed)):
            hits[i] += s > 0
    worst = 0.0
    for i in range(8):
        p = float(dist.inclusion_probability(i))
        se = math.sqrt(p * (1 - p) / draws)
        worst = max(worst, abs(hits[i] / draws - p) / se)
    record(9, worst <= 5, f"{draws} samples, 8 bidders, max deviation {worst:.2f} standard errors")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
