"""Truthful-in-expectation mechanisms: exact range optimizer plus Clarke payments.

The allocation rule picks the expected-welfare maximizer over a range that
depends only on ``(m, n, epsilon, variant)``.  Paired with Clarke-pivot
payments this makes truthful reporting a dominant strategy in expectation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .distribution import RangeDistribution, expected_welfare, sample
from .meta_tree import build_tree, meta_optimize
from .range_core import make_params
from .structured import (
    DEFAULT_MAX_BIDDERS, PreconditionError, restricted_optimize, warmup_optimize,
)
from .valuations import Instance, validate

VARIANTS = ("standard-fixed", "standard-general", "restricted")
_ALIASES = {"warmup": "standard-fixed", "fixed": "standard-fixed",
            "meta": "standard-general", "general": "standard-general",
            "standard": "standard-general"}


def canonical_variant(variant: str) -> str:
    variant = _ALIASES.get(variant, variant)
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return variant


@dataclass
class MechanismOutcome:
    distribution: RangeDistribution
    expected_welfare: Fraction
    payments: list
    pivots: list = field(default_factory=list)  # W_{-i}, the Clarke pivot terms
    sampled: tuple | None = None
    seed: int | None = None

    @property
    def base(self) -> tuple:
        return self.distribution.base

    def inclusion_probability(self, i: int) -> Fraction:
        return self.distribution.inclusion_probability(i)


class Mechanism:
    """A fixed range (m, n, epsilon, variant) and its MIDR allocation rule.

    ``invert_bonus`` swaps which allocations receive the single-winner
    bonus.  It exists only to show that the audit catches a broken rule.
    """

    def __init__(self, m: int, n: int, epsilon, variant: str = "standard-general",
                 invert_bonus: bool = False, max_bidders: int = DEFAULT_MAX_BIDDERS):
        self.m, self.n = m, n
        self.variant = canonical_variant(variant)
        self.max_bidders = max_bidders
        if self.variant == "standard-general":
            n_eff = build_tree(n).n_padded
            self.params = make_params(epsilon, m, n_eff, "meta", invert_bonus=invert_bonus)
        elif self.variant == "standard-fixed":
            if n > max_bidders:
                raise PreconditionError(
                    f"standard-fixed searches exhaustively; {n} bidders exceed {max_bidders}")
            self.params = make_params(epsilon, m, n, "warmup", invert_bonus=invert_bonus)
        else:
            if n != 2 or m & (m - 1):
                raise PreconditionError("restricted auctions need two bidders and m a power of two")
            self.params = make_params(epsilon, m, n, "restricted", invert_bonus=invert_bonus)

    def _check(self, inst: Instance):
        if inst.m != self.m or inst.n != self.n:
            raise PreconditionError(
                f"instance (m={inst.m}, n={inst.n}) does not match the range "
                f"(m={self.m}, n={self.n})")

    def solve(self, inst: Instance) -> tuple:
        """Allocation rule only: ``(distribution, expected welfare)``."""
        self._check(inst)
        if self.variant == "standard-general":
            dist, welfare, _ = meta_optimize(inst, self.params)
            return dist, welfare
        if self.variant == "standard-fixed":
            best = warmup_optimize(inst, self.params, self.max_bidders)
        else:
            best = restricted_optimize(inst, self.params)
        return RangeDistribution.single(best.allocation, best.weight), best.expected_welfare

    def pivot(self, inst: Instance, i: int) -> Fraction:
        """W_{-i}: optimal expected welfare with bidder ``i`` reporting zero."""
        return self.solve(inst.without(i))[1]

    def run(self, inst: Instance, seed: int | None = None, pivots: dict | None = None,
            only: int | None = None) -> MechanismOutcome:
        """Allocation, Clarke payments and (with ``seed``) one sampled outcome.

        ``pivots`` supplies already known W_{-i} terms; they do not depend on
        bidder ``i``'s own report.  With ``only`` set, just that bidder's
        payment is computed (others are None).
        """
        dist, welfare = self.solve(inst)
        pivots = dict(pivots or {})
        payments, pivot_list = [], []
        for i in range(inst.n):
            if only is not None and i != only:
                payments.append(None)
                pivot_list.append(pivots.get(i))
                continue
            if i not in pivots:
                pivots[i] = self.pivot(inst, i)
            payments.append(clarke_payment(inst, dist, i, pivots[i]))
            pivot_list.append(pivots[i])
        sampled = sample(dist, seed) if seed is not None else None
        return MechanismOutcome(dist, welfare, payments, pivot_list, sampled, seed)


def _others_welfare(inst, dist, i) -> Fraction:
    return sum((v(s) * dist.inclusion_probability(j)
                for j, (v, s) in enumerate(zip(inst.bidders, dist.base)) if j != i and s),
               Fraction(0))


def clarke_payment(inst, dist, i, pivot) -> Fraction:
    return pivot - _others_welfare(inst, dist, i)


def vcg_payments(inst: Instance, chosen: RangeDistribution, epsilon,
                 variant: str = "standard-general") -> list:
    """Clarke-pivot payment of every bidder for the chosen distribution."""
    mech = Mechanism(inst.m, inst.n, epsilon, variant)
    return [clarke_payment(inst, chosen, i, mech.pivot(inst, i)) for i in range(inst.n)]


def run_midr(inst: Instance, epsilon, variant: str = "standard-general",
             seed: int | None = None, validate_input: bool = True) -> MechanismOutcome:
    """Run the truthful-in-expectation mechanism on reported valuations.

    Examples
    --------
    >>> from midr.valuations import Instance, additive, zero
    >>> out = run_midr(Instance(4, [additive(4, 1), zero(4)]), "1/2")
    >>> out.base, [str(p) for p in out.payments]
    ((4, 0), ['0', '0'])
    """
    variant = canonical_variant(variant)
    if validate_input:
        report = validate(inst, require_strict=variant == "restricted")
        if not report.ok:
            i, s, msg = report.problems[0]
            raise PreconditionError(f"bidder {i}, bundle {s}: {msg}")
    return Mechanism(inst.m, inst.n, epsilon, variant).run(inst, seed)


def expected_utility(i: int, true_v, outcome: MechanismOutcome) -> Fraction:
    """Pr[bidder i is served] * true_v(o_i) - p_i, exactly."""
    s = outcome.distribution.base[i]
    value = true_v.value(s) if s else Fraction(0)
    return outcome.inclusion_probability(i) * value - outcome.payments[i]


__all__ = ["Mechanism", "MechanismOutcome", "run_midr", "vcg_payments",
           "expected_utility", "clarke_payment", "canonical_variant", "VARIANTS",
           "expected_welfare"]
