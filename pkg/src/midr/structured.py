"""Exact welfare maximization over structured ranges.

Ties between maximizers are always broken the same way: fewest items
allocated first, then the lexicographically smallest allocation.  The rule
depends only on the reported values, so every optimizer here is a
well-defined function of the reports.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction

from .range_core import (
    ApproxParams, candidate_set, is_power_of_two, r_weight, two_adic,
    weight_index,
)

DEFAULT_MAX_BIDDERS = 4
RESTRICTED_EXHAUSTIVE_BELOW = 2 ** 16


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedAllocation:
    weight: Fraction
    allocation: tuple
    expected_welfare: Fraction

    @property
    def t(self):
        nonzero = [s for s in self.allocation if s]
        return min(two_adic(s) for s in nonzero) if nonzero else None


@dataclass(frozen=True)
class PairOptimum:
    best: WeightedAllocation
    cap: int
    t: int | None  # lowest candidate level that contains the winning pair

    @property
    def left(self) -> int:
        return self.best.allocation[0]

    @property
    def right(self) -> int:
        return self.best.allocation[1]


def _prune(cands):
    """Drop candidates dominated inside one level.

    ``a`` is dominated by a smaller nonzero ``a'`` with at least its value and
    at least its 2-adic order: swapping ``a'`` in never lowers the weight
    (same zero pattern, structure exponent can only grow) nor the welfare.
    """
    out, best = [], {}
    for s, val in cands:
        if s == 0:
            out.append((s, val))
            continue
        e = two_adic(s)
        if any(v >= val for k, v in best.items() if k >= e):
            continue
        out.append((s, val))
        if val > best.get(e, Fraction(-1)):
            best[e] = val
    return out


class PairFrontier:
    """Prefix maximum of the two-bidder structured range over candidates.

    For every cap ``c`` the frontier answers the best weighted allocation
    ``(a, b)`` with ``a + b <= c``, where ``a`` and ``b`` come from the same
    candidate level ``t``.  Entries are stored at the smallest total where
    each new maximum appears, so lookups are a bisect.
    """

    def __init__(self, cand_left: dict, cand_right: dict, params: ApproxParams):
        self.params = params
        W, inv, m = params.weights, params.invert_bonus, params.m
        # score pairs with integers: values scaled by a common denominator,
        # weights by theirs; the order of scores is the order of true values
        dens = {f.denominator for c in (cand_left, cand_right)
                for level in c.values() for _, f in level}
        dv = math.lcm(*dens) if dens else 1
        dw = math.lcm(*(w.denominator for w in W))
        wint = [w.numerator * (dw // w.denominator) for w in W]
        self._scale = dv * dw

        def scaled(cands):
            return [(s, f.numerator * (dv // f.denominator)) for s, f in _prune(cands)]

        seen = {(0, 0): (0, None)}
        for t in sorted(set(cand_left) & set(cand_right)):
            left, right = scaled(cand_left[t]), scaled(cand_right[t])
            for a, fa in left:
                for b, fb in right:
                    if a + b > m:
                        break
                    if (a, b) in seen:
                        continue
                    if a and b:
                        j = min(two_adic(a), two_adic(b)) + inv
                    elif a or b:
                        j = two_adic(a or b) + (not inv)
                    else:
                        j = None
                    seen[(a, b)] = (0 if j is None else wint[j] * (fa + fb), t)
        order = sorted(seen, key=lambda ab: (ab[0] + ab[1], ab))
        self.sums, self._scores, self.pairs, self.levels = [], [], [], []
        top = -1
        for ab in order:
            score, t = seen[ab]
            if score > top:
                top = score
                self.sums.append(ab[0] + ab[1])
                self._scores.append(score)
                self.pairs.append(ab)
                self.levels.append(t)
        self._values = [None] * len(self.sums)
        self.searched = len(seen)

    def __len__(self):
        return len(self.sums)

    def _value_at(self, k: int) -> Fraction:
        v = self._values[k]
        if v is None:
            v = self._values[k] = Fraction(self._scores[k], self._scale)
        return v

    @property
    def values(self) -> list:
        return [self._value_at(k) for k in range(len(self.sums))]

    def value(self, cap: int) -> Fraction:
        return self._value_at(bisect.bisect_right(self.sums, cap) - 1)

    def at(self, cap: int) -> PairOptimum:
        k = bisect.bisect_right(self.sums, cap) - 1
        a, b = self.pairs[k]
        j = weight_index((a, b), self.params.invert_bonus)
        w = Fraction(1) if j is None else self.params.weights[j]
        return PairOptimum(WeightedAllocation(w, (a, b), self._value_at(k)), cap,
                           self.levels[k])


def optimize_pair(cand_left: dict, cand_right: dict, cap: int,
                  params: ApproxParams) -> PairOptimum:
    """Best weighted allocation of at most ``cap`` items to two (meta-)bidders.

    ``cand_left`` / ``cand_right`` map each level ``t`` to evaluated
    ``(bundle, value)`` candidates (see :func:`candidate_set`).  The pair
    ``(0, 0)`` is always available.
    """
    if not 0 <= cap <= params.m:
        raise PreconditionError(f"cap {cap} outside 0..{params.m}")
    return PairFrontier(cand_left, cand_right, params).at(cap)


def _better(val, alloc, best_val, best_alloc):
    if val != best_val:
        return val > best_val
    return (sum(alloc), alloc) < (sum(best_alloc), best_alloc)


def warmup_optimize(inst, params: ApproxParams,
                    max_bidders: int = DEFAULT_MAX_BIDDERS) -> WeightedAllocation:
    """Welfare-maximizing weighted allocation over the full structured range.

    For every level ``t`` the n-fold product of per-bidder candidates
    (neighborhoods of width n around ``2**t``-breakpoints) is searched
    exhaustively.  The cost is the product of candidate-set sizes, so the
    number of bidders is capped by ``max_bidders``.
    """
    n, m = inst.n, inst.m
    if n > max_bidders:
        raise PreconditionError(f"{n} bidders exceed the exhaustive-search bound {max_bidders}")
    if params.m != m:
        raise PreconditionError("params built for a different m")
    W, inv = params.weights, params.invert_bonus
    cands = [candidate_set(v, params, 0, n) for v in inst.bidders]
    best_val, best = Fraction(0), (0,) * n

    for t in range(params.max_exponent + 1):
        levels = [_prune(c[t]) for c in cands]
        alloc = [0] * n

        def search(i, budget, total):
            nonlocal best_val, best
            if i == n:
                j = weight_index(alloc, inv)
                if j is None:
                    return
                val = W[j] * total
                cand = tuple(alloc)
                if _better(val, cand, best_val, best):
                    best_val, best = val, cand
                return
            for s, val in levels[i]:
                if s > budget:
                    break
                alloc[i] = s
                search(i + 1, budget - s, total + val)
            alloc[i] = 0

        search(0, m, Fraction(0))

    j = weight_index(best, inv)
    w = Fraction(1) if j is None else W[j]
    return WeightedAllocation(w, best, best_val)


def restricted_optimize(inst, params: ApproxParams,
                        exhaustive_below: int = RESTRICTED_EXHAUSTIVE_BELOW) -> WeightedAllocation:
    """Best r-weighted split ``(k, m - k)``, ``1 <= k < m``, or nothing.

    Candidates come from width-2 neighborhoods of ``2**t``-breakpoints with
    both bundles summing to exactly ``m``.  When ``m <= exhaustive_below``
    every split is scored as well, which makes the result exact even if the
    breakpoint argument were to fail on some input.
    """
    m = inst.m
    if inst.n != 2 or not is_power_of_two(m):
        raise PreconditionError("restricted auctions need two bidders and m a power of two")
    if params.m != m:
        raise PreconditionError("params built for a different m")
    v1, v2 = inst.bidders
    splits = set()
    if m <= exhaustive_below:
        splits.update(range(1, m))
    else:
        c1 = candidate_set(v1, params, 0, 2)
        c2 = candidate_set(v2, params, 0, 2)
        for t in range(params.max_exponent + 1):
            right = {s for s, _ in c2[t]}
            splits.update(a for a, _ in c1[t] if 1 <= a < m and m - a in right)
    best_val, best = Fraction(0), (0, 0)
    for a in sorted(splits):
        alloc = (a, m - a)
        val = r_weight(alloc, params) * (v1(a) + v2(m - a))
        if _better(val, alloc, best_val, best):
            best_val, best = val, alloc
    w = r_weight(best, params) if best != (0, 0) else Fraction(1)
    return WeightedAllocation(w, best, best_val)
