"""Weights, approximation parameters and breakpoint discovery.

Everything here is exact: ``delta`` and ``epsilon_prime`` are rationals chosen
so that the inequalities the optimality arguments need can be checked with
integer arithmetic.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .valuations import as_fraction

VARIANTS = ("warmup", "meta", "restricted")
MIN_DENOMINATOR_BITS = 16


def log2_floor(m: int) -> int:
    return m.bit_length() - 1


def log2_ceil(m: int) -> int:
    return (m - 1).bit_length()


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def two_adic(s: int) -> int:
    """Exponent of the largest power of two dividing ``s > 0``."""
    return (s & -s).bit_length() - 1


def log_inv_lower_bound(x: Fraction, tol_bits: int = 64) -> Fraction:
    """Certified rational lower bound on ``ln(1 / (1 - x))`` for ``0 < x < 1``.

    Partial sums of ``sum_k x**k / k`` only undershoot since every term is
    positive.
    """
    total, power, k = Fraction(0), Fraction(1), 0
    eps = Fraction(1, 2 ** tol_bits)
    while True:
        k += 1
        power *= x
        term = power / k
        total += term
        if term < eps * total:
            return total


def _largest_dyadic(estimate: float, ok, bits: int = MIN_DENOMINATOR_BITS) -> Fraction:
    """Largest ``p / 2**bits`` near ``estimate`` accepted by ``ok``.

    The denominator grows when the estimate rounds to zero.
    """
    while True:
        den = 2 ** bits
        num = max(0, math.floor(estimate * den) + 2)
        while num > 0 and not ok(Fraction(num, den)):
            num -= 1
        if num > 0:
            return Fraction(num, den)
        bits += 8


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ApproxParams:
    """Approximation parameters of one structured range.

    ``epsilon_prime`` is only set for the meta-tree variant, where every
    two-bidder node uses it in place of ``epsilon``.
    """

    epsilon: Fraction
    delta: Fraction
    m: int
    n: int
    variant: str = "warmup"
    epsilon_prime: Fraction | None = None
    # mutation switch for audit sanity checks: gives the bonus to the wrong
    # allocations, which breaks the optimality arguments
    invert_bonus: bool = False

    @property
    def log_m(self) -> int:
        return log2_ceil(self.m)

    @property
    def max_exponent(self) -> int:
        return log2_floor(self.m)

    @property
    def eps_eff(self) -> Fraction:
        return self.epsilon_prime if self.variant == "meta" else self.epsilon

    @cached_property
    def weights(self) -> tuple:
        """``weights[j] = (1 - eps_eff) * (1 + 2 delta)**j``, j = 0..max_exponent+1."""
        base, ratio = 1 - self.eps_eff, 1 + 2 * self.delta
        return tuple(base * ratio ** j for j in range(self.max_exponent + 2))

    def check(self) -> None:
        """Raise ParameterError unless every defining inequality holds exactly."""
        eps_eff = self.eps_eff
        if not 0 < self.epsilon <= Fraction(1, 2):
            raise ParameterError(f"epsilon {self.epsilon} outside (0, 1/2]")
        if self.variant == "meta":
            k = log2_floor(self.n)
            if not 0 < eps_eff <= self.epsilon:
                raise ParameterError("epsilon_prime must lie in (0, epsilon]")
            if (1 - eps_eff) ** k < 1 - self.epsilon:
                raise ParameterError("(1 - epsilon_prime)**log2(n) < 1 - epsilon")
        if self.delta <= 0:
            raise ParameterError("delta must be positive")
        bound = log_inv_lower_bound(eps_eff) / (2 * self.log_m + 2)
        if self.delta > bound:
            raise ParameterError(f"delta {self.delta} exceeds the certified log bound")
        if (1 + 2 * self.delta) ** (self.log_m + 1) * (1 - eps_eff) > 1:
            raise ParameterError("(1 + 2 delta)**(log m + 1) > 1 / (1 - eps)")


def _variant_name(variant: str) -> str:
    aliases = {"standard-fixed": "warmup", "standard-general": "meta",
               "general": "meta", "fixed": "warmup"}
    variant = aliases.get(variant, variant)
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}")
    return variant


def make_params(epsilon, m: int, n: int = 2, variant: str = "warmup",
                delta=None, epsilon_prime=None, invert_bonus: bool = False) -> ApproxParams:
    """Exact approximation parameters for ``m`` items and ``n`` bidders.

    ``delta`` (and ``epsilon_prime`` for the meta variant) default to the
    largest dyadic rational with a ``2**16`` denominator that satisfies the
    defining bounds; explicit values are validated instead.
    """
    epsilon = as_fraction(epsilon)
    variant = _variant_name(variant)
    if not 0 < epsilon <= Fraction(1, 2):
        raise ParameterError(f"epsilon {epsilon} outside (0, 1/2]")
    if not isinstance(m, int) or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m!r}")
    if n < 1:
        raise ParameterError("need at least one bidder")
    if variant == "restricted" and (n != 2 or not is_power_of_two(m)):
        raise ParameterError("restricted variant needs n = 2 and m a power of two")

    eps_eff = epsilon
    if variant == "meta":
        if not is_power_of_two(n) or n < 2:
            raise ParameterError(f"meta variant needs n a power of two >= 2, got {n}")
        k = log2_floor(n)
        if epsilon_prime is not None:
            eps_eff = as_fraction(epsilon_prime)
        elif k == 1:
            eps_eff = epsilon
        else:
            target = 1 - (1 - epsilon) ** (1 / k)
            eps_eff = _largest_dyadic(float(target),
                                      lambda e: (1 - e) ** k >= 1 - epsilon)
    if delta is None:
        bound = log_inv_lower_bound(eps_eff) / (2 * log2_ceil(m) + 2)
        lm = log2_ceil(m)
        delta = _largest_dyadic(
            float(bound),
            lambda d: d <= bound and (1 + 2 * d) ** (lm + 1) * (1 - eps_eff) <= 1)
    params = ApproxParams(epsilon, as_fraction(delta), m, n, variant,
                          eps_eff if variant == "meta" else None, invert_bonus)
    params.check()
    return params


def structure_exponent(alloc) -> int:
    """Largest ``t`` such that every bundle is a multiple of ``2**t``."""
    nonzero = [s for s in alloc if s]
    if not nonzero:
        raise ValueError("structure exponent of the empty allocation is undefined")
    return min(two_adic(s) for s in nonzero)


def weight_index(alloc, invert_bonus: bool = False) -> int | None:
    """``t + [bonus]`` for a non-empty allocation, None for the empty one."""
    t, nonzero = None, 0
    for s in alloc:
        if s:
            nonzero += 1
            e = two_adic(s)
            if t is None or e < t:
                t = e
    if t is None:
        return None
    bonus = (nonzero == 1) != invert_bonus
    return t + bonus


def weight(alloc, params: ApproxParams) -> Fraction:
    """Probability that a structured range delivers ``alloc``.

    The empty allocation gets weight 1 (its welfare is 0 either way).
    Otherwise ``(1 - eps)(1 + 2 delta)**t * p`` with ``p = 1 + 2 delta`` iff
    exactly one bidder receives items.
    """
    if sum(alloc) > params.m:
        raise ValueError(f"allocation {tuple(alloc)} exceeds m = {params.m}")
    j = weight_index(alloc, params.invert_bonus)
    return Fraction(1) if j is None else params.weights[j]


def r_weight(alloc, params: ApproxParams) -> Fraction:
    """Weight for the restricted two-bidder auction: all-to-one gets 0."""
    if len(alloc) != 2:
        raise ValueError("r-weight is defined for two bidders only")
    m = params.m
    if tuple(alloc) in ((m, 0), (0, m)):
        return Fraction(0)
    return weight(alloc, params)


class GeometricGrid:
    """Thresholds ``anchor * (1 + delta)**j`` for ``j >= 0``.

    :meth:`level` compares in floating point first and falls back to exact
    integer arithmetic only when the float estimate is within 1e-6 of a grid
    point, so it is exact but cheap.
    """

    def __init__(self, anchor: Fraction, delta: Fraction):
        if anchor <= 0:
            raise ValueError("grid anchor must be positive")
        self.anchor = Fraction(anchor)
        self.delta = Fraction(delta)
        q = 1 + self.delta
        self._qn, self._qd = q.numerator, q.denominator
        self._log_anchor = _log(self.anchor)
        self._log_q = math.log1p(float(self.delta))

    def threshold(self, j: int) -> Fraction:
        return self.anchor * Fraction(self._qn ** j, self._qd ** j)

    def reaches(self, j: int):
        """Predicate ``v >= threshold(j)``.

        Decided in floating point unless ``log v`` is within 1e-9 of the
        threshold's log, where the exact integer comparison takes over.
        """
        lt = self._log_anchor + j * self._log_q

        def pred(v: Fraction) -> bool:
            if v <= 0:
                return False
            lv = _log(v)
            if lv > lt + 1e-9:
                return True
            if lv < lt - 1e-9:
                return False
            return self._le(j, v)

        return pred

    def _le(self, j: int, v: Fraction) -> bool:
        # anchor * qn**j / qd**j <= v
        a = self.anchor
        return (a.numerator * self._qn ** j * v.denominator
                <= v.numerator * a.denominator * self._qd ** j)

    def level(self, v) -> int:
        """Largest ``j`` with ``threshold(j) <= v``; -1 if ``v < anchor``."""
        v = Fraction(v)
        if v < self.anchor:
            return -1
        x = (_log(v) - self._log_anchor) / self._log_q
        j = math.floor(x)
        if abs(x - round(x)) > 1e-6:
            return max(j, 0)
        j = max(round(x), 0)
        while not self._le(j, v):
            j -= 1
        while self._le(j + 1, v):
            j += 1
        return j


def _log(v: Fraction) -> float:
    return math.log(v.numerator) - math.log(v.denominator)


@dataclass
class BreakpointTable:
    """Breakpoints of a valuation on multiples of ``b``.

    ``entries`` is sorted by bundle, starts with ``(0, 0)`` and holds the
    value at each breakpoint.  ``anchor`` is the first multiple of ``b`` with
    positive value (None when the valuation vanishes on all multiples).
    """

    b: int
    r: Fraction
    anchor: int | None
    entries: list

    @property
    def bundles(self) -> list:
        return [s for s, _ in self.entries]


def _smallest(lo: int, hi: int, pred) -> int | None:
    """Smallest k in [lo, hi] with monotone ``pred(k)`` true, else None."""
    if lo > hi:
        return None
    k = bisect.bisect_left(range(lo, hi + 1), True, key=pred) + lo
    return k if k <= hi else None


def find_breakpoints(v, b: int, params: ApproxParams, r=0) -> BreakpointTable:
    """r-significant b-breakpoints of a monotone value oracle ``v``.

    A breakpoint is the smallest multiple of ``b`` whose value reaches a
    threshold ``v(b*) (1 + delta)**l``, where ``b*`` is the first multiple
    of ``b`` with positive value.  Bundle 0 is always included; other
    breakpoints are kept only if their value is at least ``r``.  Each one is
    located by binary search, so the oracle sees O(log(m / b)) queries per
    breakpoint.
    """
    r = Fraction(r)
    top = v.m // b
    entries = [(0, Fraction(0))]

    def f(k):
        return v(k * b)

    if top == 0 or f(top) == 0:
        return BreakpointTable(b, r, None, entries)
    kstar = _smallest(1, top, lambda k: f(k) > 0)
    grid = GeometricGrid(f(kstar), params.delta)

    if r <= grid.anchor:
        cur = kstar
        entries.append((cur * b, f(cur)))
    else:
        if f(top) < r:
            return BreakpointTable(b, r, kstar * b, entries)
        cur = _smallest(kstar, top, lambda k: f(k) >= r)
        below = f(cur - 1) if cur > 1 else Fraction(0)
        if grid.level(f(cur)) > grid.level(below):
            entries.append((cur * b, f(cur)))
    while cur < top:
        need = grid.level(f(cur)) + 1
        reached = grid.reaches(need)
        if not reached(f(top)):
            break
        cur = _smallest(cur + 1, top, lambda k: reached(f(k)))
        entries.append((cur * b, f(cur)))
    return BreakpointTable(b, r, kstar * b, entries)


def neighborhood(s: int, b: int, width: int, m: int) -> list:
    """Bundles ``s, s + b, ..., s + width * b`` that fit in ``0..m``."""
    return [s + k * b for k in range(width + 1) if s + k * b <= m]


def candidate_set(v, params: ApproxParams, r=0, width: int = 2) -> dict:
    """Evaluated neighborhoods of significant ``2**t``-breakpoints, per ``t``.

    Returns ``{t: [(bundle, value), ...]}`` sorted by bundle for
    ``t = 0..floor(log2 m)``.  A valuation with no significant positive
    breakpoint on multiples of ``2**t`` only gets bundle 0: handing it
    items can never raise the weighted welfare of an optimal allocation.
    """
    out = {}
    for t in range(params.max_exponent + 1):
        b = 2 ** t
        table = find_breakpoints(v, b, params, r)
        if len(table.entries) == 1:
            out[t] = [(0, Fraction(0))]
            continue
        bundles = set()
        for s, _ in table.entries:
            bundles.update(neighborhood(s, b, width, v.m))
        out[t] = [(s, v(s)) for s in sorted(bundles)]
    return out
