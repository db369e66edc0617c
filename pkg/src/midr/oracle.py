"""Brute-force ground truth for desk-scale instances.

Everything here enumerates; nothing is clever.  Values are read through
:meth:`Valuation.value`, so oracle runs never disturb query counters.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .distribution import Node, RangeDistribution
from .meta_tree import build_tree
from .range_core import BreakpointTable, r_weight, weight_index
from .structured import WeightedAllocation, _better
from .valuations import Instance, Valuation, step_list, zero

ENUMERATION_LIMIT = 10 ** 7
AUDIT_MAX_M, AUDIT_MAX_N = 2 ** 10, 16


class GuardExceeded(RuntimeError):
    """An enumeration would exceed its size guard."""


def _raw(v, s):
    return v.value(s) if isinstance(v, Valuation) else v(s)


def _allocations(n: int, cap: int):
    """Every allocation of at most ``cap`` items to ``n`` bidders."""
    alloc = [0] * n

    def rec(i, left):
        if i == n:
            yield tuple(alloc)
            return
        for s in range(left + 1):
            alloc[i] = s
            yield from rec(i + 1, left - s)
        alloc[i] = 0

    yield from rec(0, cap)


def _count_allocations(n: int, cap: int) -> int:
    return math.comb(cap + n, n)


def brute_force_structured_opt(inst, params, cap: int | None = None) -> WeightedAllocation:
    """Exact optimum of weight * welfare over every allocation with sum <= cap."""
    cap = inst.m if cap is None else cap
    n = inst.n
    if (inst.m + 1) ** n > ENUMERATION_LIMIT:
        raise GuardExceeded(f"(m+1)^n = {(inst.m + 1) ** n} exceeds {ENUMERATION_LIMIT}")
    vals = [[_raw(v, s) for s in range(cap + 1)] for v in inst.bidders]
    W, inv = params.weights, params.invert_bonus
    best_val, best = Fraction(0), (0,) * n
    for alloc in _allocations(n, cap):
        j = weight_index(alloc, inv)
        if j is None:
            continue
        val = W[j] * sum(vals[i][s] for i, s in enumerate(alloc))
        if _better(val, alloc, best_val, best):
            best_val, best = val, alloc
    j = weight_index(best, inv)
    return WeightedAllocation(Fraction(1) if j is None else W[j], best, best_val)


def _node_weights(base, n_padded, params):
    """Weights of all internal nodes (heap order) for a padded base allocation.

    A range element is pinned down by its base allocation: each internal
    node's weight is the weight of the split (items below its left child,
    items below its right child).
    """
    W, inv = params.weights, params.invert_bonus
    sums = [0] * (2 * n_padded)
    sums[n_padded:] = base
    weights = [Fraction(1)] * n_padded
    for k in range(n_padded - 1, 0, -1):
        a, b = sums[2 * k], sums[2 * k + 1]
        sums[k] = a + b
        j = weight_index((a, b), inv)
        weights[k] = Fraction(1) if j is None else W[j]
    return weights


def _distribution(base, weights, tree) -> RangeDistribution:
    n = tree.n
    nodes = []
    for k in range(1, tree.n_padded):
        lo, hi = tree.interval(k)
        if lo < n:
            nodes.append(Node(lo, min(hi, n - 1), weights[k]))
    return RangeDistribution(tuple(base[:n]), tuple(nodes))


def _lcm_denominators(xs) -> int:
    d = 1
    for x in xs:
        d = math.lcm(d, Fraction(x).denominator)
    return d


def brute_force_range_opt(inst, params) -> tuple:
    """Best element of the nested range by enumerating base allocations.

    Every allocation of at most ``m`` items is scored.  Subtrees are
    enumerated bottom-up as lists of ``(items, score, allocation)`` and
    crossed at their parent, so the root loop touches each base allocation
    exactly once.  Scores are integers: all leaves sit at the same depth, so
    scaling values and weights by common denominators (weights once per level)
    keeps comparisons exact.  Returns ``(distribution, expected_welfare)``.
    """
    tree = build_tree(inst.n)
    n, m = inst.n, inst.m
    if _count_allocations(n, m) > ENUMERATION_LIMIT:
        raise GuardExceeded(f"C(m+n, n) = {_count_allocations(n, m)} exceeds {ENUMERATION_LIMIT}")
    vals = [[_raw(v, s) for s in range(m + 1)] for v in inst.bidders]
    lv = _lcm_denominators(x for row in vals for x in row)
    W, inv = params.weights, params.invert_bonus
    lw = _lcm_denominators(W)
    wint = [int(w * lw) for w in W]

    def split_weight(a, b):
        j = weight_index((a, b), inv)
        return lw if j is None else wint[j]

    def enum(k):
        if tree.is_leaf(k):
            i = tree.bidder(k)
            if i >= n:
                return [(0, 0, (0,))]
            return [(s, int(vals[i][s] * lv), (s,)) for s in range(m + 1)]
        left, right = enum(2 * k), enum(2 * k + 1)
        out = []
        for a, sa, xa in left:
            for b, sb, xb in right:
                if a + b <= m:
                    out.append((a + b, split_weight(a, b) * (sa + sb), xa + xb))
        return out

    def key(entry):
        total, score, alloc = entry
        return (-score, total, alloc)

    best = min(enum(1), key=key)
    base = best[2]
    scale = lv * lw ** tree.depth
    weights = _node_weights(base, tree.n_padded, params)
    return _distribution(base, weights, tree), Fraction(best[1], scale)


def brute_force_restricted_opt(inst, params) -> WeightedAllocation:
    """Best r-weighted split (k, m - k) by enumerating every k."""
    m = inst.m
    v1, v2 = inst.bidders
    best_val, best = Fraction(0), (0, 0)
    for k in range(1, m):
        alloc = (k, m - k)
        val = r_weight(alloc, params) * (_raw(v1, k) + _raw(v2, m - k))
        if _better(val, alloc, best_val, best):
            best_val, best = val, alloc
    w = r_weight(best, params) if best != (0, 0) else Fraction(1)
    return WeightedAllocation(w, best, best_val)


def unweighted_opt(inst) -> Fraction:
    """Exact max of sum_i v_i(s_i) with sum_i s_i <= m (knapsack DP)."""
    n, m = inst.n, inst.m
    if n * m * m > 10 ** 8:
        raise GuardExceeded(f"n*m^2 = {n * m * m} exceeds 10^8")
    best = [Fraction(0)] * (m + 1)  # best[c]: optimum of bidders so far with <= c items
    for v in inst.bidders:
        vals = [_raw(v, s) for s in range(m + 1)]
        best = [max(best[c - s] + vals[s] for s in range(c + 1)) for c in range(m + 1)]
    return best[m]


def brute_force_breakpoints(v, b: int, params, r=0) -> BreakpointTable:
    """Breakpoint table from every multiple of ``b`` and every grid threshold.

    All values on multiples of ``b`` are tabulated and, for each threshold
    ``v(b*) (1 + delta)**l`` up to ``v(m)``, the first multiple reaching it is
    recorded.
    """
    r = Fraction(r)
    top = v.m // b
    if top > 10 ** 6:
        raise GuardExceeded(f"m/b = {top} exceeds 10^6")
    vals = [_raw(v, k * b) for k in range(top + 1)]
    entries = [(0, Fraction(0))]
    kstar = next((k for k in range(1, top + 1) if vals[k] > 0), None)
    if kstar is None:
        return BreakpointTable(b, r, None, entries)
    # thresholds as unreduced integer fractions num/den, stepped by (1 + delta)
    q = 1 + params.delta
    num, den = vals[kstar].numerator, vals[kstar].denominator
    top_v = vals[top]
    found = set()
    while num * top_v.denominator <= top_v.numerator * den:
        lo, hi = kstar, top
        while lo < hi:  # first k with vals[k] >= num/den
            mid = (lo + hi) // 2
            if vals[mid].numerator * den >= num * vals[mid].denominator:
                hi = mid
            else:
                lo = mid + 1
        if vals[lo] >= r:
            found.add(lo)
        num, den = num * q.numerator, den * q.denominator
    entries += [(k * b, vals[k]) for k in sorted(found)]
    return BreakpointTable(b, r, kstar * b, entries)


# ---------------------------------------------------------------- audits


def misreports(v: Valuation, rng: random.Random, count: int = 20,
               strict: bool = False) -> list:
    """Deterministic family of deviations from ``v``: ``[(descriptor, Valuation)]``.

    Zero, halved and doubled reports, truncations of the step list, and
    seeded random perturbations of individual steps.  With ``strict`` every
    report is made strictly increasing (restricted auctions).
    """
    m = v.m
    steps = v.steps()
    out = [("zero", zero(m)), ("scale 1/2", v.scaled(Fraction(1, 2))),
           ("scale 2", v.scaled(2))]
    for keep in range(len(steps)):
        out.append((f"truncate {keep}", step_list(m, steps[:keep]) if keep else zero(m)))
        if len(out) >= count // 2:
            break
    top = max((val for _, val in steps), default=Fraction(1))
    j = 0
    while len(out) < count:
        pts = sorted(rng.sample(range(1, m + 1), rng.randint(1, min(6, m))))
        vals = sorted(Fraction(rng.randint(1, 40), 20) * top for _ in pts)
        out.append((f"random {j}", step_list(m, list(zip(pts, vals)))))
        j += 1
    if strict:
        out = [(d, _strictify(r)) for d, r in out]
    return out


def _strictify(v: Valuation) -> Valuation:
    """Add a tiny linear term so the report is strictly increasing."""
    m = v.m
    eps = Fraction(1, 1000 * m)
    vals = [v.value(s) + eps * s for s in range(1, m + 1)]
    return step_list(m, list(zip(range(1, m + 1), vals)))


@dataclass
class AuditEntry:
    bidder: int
    misreport: str
    truthful_utility: Fraction
    deviant_utility: Fraction

    @property
    def violated(self) -> bool:
        return self.deviant_utility > self.truthful_utility


@dataclass
class AuditReport:
    instance_id: str
    entries: list = field(default_factory=list)

    @property
    def checks(self) -> int:
        return len(self.entries)

    @property
    def violations(self) -> list:
        return [e for e in self.entries if e.violated]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> dict:
        return {"instance": self.instance_id, "checks": self.checks,
                "violations": len(self.violations)}


def truthfulness_audit(inst: Instance, epsilon, variant: str = "standard-general",
                       count: int = 20, seed: int = 0, instance_id: str = "",
                       invert_bonus: bool = False) -> AuditReport:
    """Compare exact expected utilities of truthful and misreported bids.

    For every bidder, runs the mechanism on ``count`` misreports and checks
    that none earns more true expected utility than the truthful report.
    """
    from .mechanism import Mechanism, expected_utility

    if inst.m > AUDIT_MAX_M or inst.n > AUDIT_MAX_N:
        raise GuardExceeded(f"audits are limited to m <= {AUDIT_MAX_M} and n <= {AUDIT_MAX_N}")
    mech = Mechanism(inst.m, inst.n, epsilon, variant, invert_bonus=invert_bonus)
    rng = random.Random(seed)
    report = AuditReport(instance_id)
    truthful = mech.run(inst)
    strict = mech.variant == "restricted"
    for i, true_v in enumerate(inst.bidders):
        u_true = expected_utility(i, true_v, truthful)
        pivot = truthful.pivots[i]
        for desc, fake in misreports(true_v, rng, count, strict):
            out = mech.run(inst.replace(i, fake), pivots={i: pivot}, only=i)
            report.entries.append(AuditEntry(i, desc, u_true,
                                             expected_utility(i, true_v, out)))
    return report
