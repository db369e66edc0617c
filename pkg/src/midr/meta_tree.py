"""FPTAS for any number of bidders via a hierarchy of two-bidder meta-bidders.

Nodes are heap-indexed: the root is 1, node ``k`` has children ``2k`` and
``2k + 1``, and leaf ``n_padded + i`` is bidder ``i``.  Each internal node's
meta-valuation is the prefix-maximum frontier of a two-bidder structured range
over its children's cached candidates.  Only those candidates (bundles near
significant breakpoints) are ever evaluated, which keeps the number of value
queries polynomial in ``n``, ``log m`` and ``1 / epsilon``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .distribution import Node, RangeDistribution
from .range_core import ApproxParams, candidate_set, make_params
from .structured import PairFrontier, PreconditionError


@dataclass(frozen=True)
class Hierarchy:
    n: int
    n_padded: int

    @property
    def depth(self) -> int:
        return self.n_padded.bit_length() - 1

    def is_leaf(self, k: int) -> bool:
        return k >= self.n_padded

    def bidder(self, k: int) -> int:
        return k - self.n_padded

    def level(self, k: int) -> int:
        """Root is level 1; levels grow by one per generation."""
        return k.bit_length()

    def interval(self, k: int) -> tuple:
        d = k.bit_length() - 1
        size = self.n_padded >> d
        lo = (k - (1 << d)) * size
        return lo, lo + size - 1

    def internal_nodes(self):
        return range(1, self.n_padded)

    def leaves(self):
        return range(self.n_padded, 2 * self.n_padded)


def build_tree(n: int) -> Hierarchy:
    """Complete binary hierarchy over ``n`` bidders padded to a power of two.

    A single bidder is padded to two so that the root is a genuine
    two-bidder node.
    """
    if n < 1:
        raise ValueError("need at least one bidder")
    n_padded = 2
    while n_padded < n:
        n_padded *= 2
    return Hierarchy(n, n_padded)


class _FrontierOracle:
    """Monotone value oracle backed by a node's frontier (no raw queries)."""

    def __init__(self, frontier: PairFrontier, m: int):
        self.frontier, self.m = frontier, m

    def __call__(self, s: int) -> Fraction:
        return self.frontier.value(s)


@dataclass
class EvalTable:
    tree: Hierarchy
    params: ApproxParams
    max_value: Fraction
    candidates: dict = field(default_factory=dict)   # node -> {t: [(bundle, value)]}
    frontiers: dict = field(default_factory=dict)    # internal node -> PairFrontier
    thresholds: dict = field(default_factory=dict)  # node -> significance threshold

    def significance(self, k: int) -> Fraction:
        return self.thresholds[k]


def meta_params(epsilon, m: int, n: int) -> ApproxParams:
    return make_params(epsilon, m, build_tree(n).n_padded, "meta")


def evaluate_bottom_up(inst, params: ApproxParams) -> EvalTable:
    """Cache candidate evaluations for every node, children first.

    A node at level ``l`` keeps breakpoints whose value reaches
    ``delta**l * max_i v_i(m) / 2``.
    """
    tree = build_tree(inst.n)
    if params.variant != "meta" or params.n != tree.n_padded or params.m != inst.m:
        raise PreconditionError("params must be meta-variant params for this instance")
    m = inst.m
    max_value = max((v(m) for v in inst.bidders), default=Fraction(0))
    table = EvalTable(tree, params, max_value)
    trivial = {t: [(0, Fraction(0))] for t in range(params.max_exponent + 1)}
    for k in list(tree.leaves()) + list(tree.internal_nodes()):
        table.thresholds[k] = params.delta ** tree.level(k) * max_value / 2

    for k in tree.leaves():
        i = tree.bidder(k)
        if i >= inst.n or max_value == 0:
            table.candidates[k] = trivial
        else:
            table.candidates[k] = candidate_set(inst.bidders[i], params,
                                                table.thresholds[k], 2)
    for k in reversed(tree.internal_nodes()):
        frontier = PairFrontier(table.candidates[2 * k], table.candidates[2 * k + 1], params)
        table.frontiers[k] = frontier
        if k == 1:
            continue  # the root is only ever evaluated at m
        if max_value == 0:
            table.candidates[k] = trivial
        else:
            table.candidates[k] = candidate_set(_FrontierOracle(frontier, m), params,
                                                table.thresholds[k], 2)
    return table


def meta_value(k: int, s: int, table: EvalTable, inst=None) -> Fraction:
    """Cached meta-valuation of node ``k`` at bundle ``s`` (raw value at leaves)."""
    tree = table.tree
    if tree.is_leaf(k):
        i = tree.bidder(k)
        if inst is None:
            raise ValueError("leaf values need the instance")
        return inst.bidders[i](s) if i < inst.n else Fraction(0)
    return table.frontiers[k].value(s)


def extract_top_down(inst, table: EvalTable) -> RangeDistribution:
    """Read off the optimal distribution, splitting each node's budget.

    The root starts with all ``m`` items; every internal node picks the
    frontier entry at its budget and hands the two parts to its children.
    """
    tree, n = table.tree, inst.n
    base = [0] * tree.n_padded
    nodes = []
    queue = [(1, inst.m)]
    while queue:
        k, budget = queue.pop(0)
        if tree.is_leaf(k):
            base[tree.bidder(k)] = budget
            continue
        opt = table.frontiers[k].at(budget)
        lo, hi = tree.interval(k)
        if lo < n:
            nodes.append(Node(lo, min(hi, n - 1), opt.best.weight))
        a, b = opt.best.allocation
        queue.append((2 * k, a))
        queue.append((2 * k + 1, b))
    return RangeDistribution(tuple(base[:n]), tuple(nodes))


def meta_optimize(inst, params: ApproxParams) -> tuple:
    """Run both passes; returns ``(distribution, expected welfare, table)``."""
    table = evaluate_bottom_up(inst, params)
    dist = extract_top_down(inst, table)
    return dist, table.frontiers[1].value(inst.m), table
