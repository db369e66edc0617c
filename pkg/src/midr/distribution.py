"""Nested weighted compositions: the distributions a range mechanism outputs."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Node:
    """One weighted composition: bidders ``lo..hi`` are served with prob. ``weight``."""

    lo: int
    hi: int
    weight: Fraction

    def __contains__(self, i: int) -> bool:
        return self.lo <= i <= self.hi


@dataclass(frozen=True)
class RangeDistribution:
    """Base allocation plus one coin per composition node.

    Bidder ``i`` receives ``base[i]`` items iff every node containing ``i``
    succeeds, and nothing otherwise.  ``nodes`` is ordered parents first.
    """

    base: tuple
    nodes: tuple

    @classmethod
    def single(cls, allocation, weight) -> "RangeDistribution":
        allocation = tuple(allocation)
        return cls(allocation, (Node(0, len(allocation) - 1, Fraction(weight)),))

    @property
    def n(self) -> int:
        return len(self.base)

    def inclusion_probability(self, i: int) -> Fraction:
        p = Fraction(1)
        for node in self.nodes:
            if i in node:
                p *= node.weight
        return p

    def inclusion_probabilities(self) -> list:
        return [self.inclusion_probability(i) for i in range(self.n)]


def expected_welfare(dist: RangeDistribution, inst) -> Fraction:
    if dist.n != inst.n:
        raise ValueError(f"distribution over {dist.n} bidders, instance has {inst.n}")
    return sum((v(s) * dist.inclusion_probability(i)
                for i, (v, s) in enumerate(zip(inst.bidders, dist.base)) if s),
               Fraction(0))


def sample(dist: RangeDistribution, seed: int) -> tuple:
    """Draw one allocation; flips exactly one exact Bernoulli coin per node."""
    rng = random.Random(seed)
    served = [True] * dist.n
    for node in dist.nodes:
        w = node.weight
        if rng.randrange(w.denominator) >= w.numerator:
            for i in range(node.lo, node.hi + 1):
                served[i] = False
    return tuple(s if ok else 0 for s, ok in zip(dist.base, served))
