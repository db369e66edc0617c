"""Value-query oracles for multi-unit valuations.

A valuation maps a bundle size ``s`` in ``0..m`` to a nonnegative exact
rational.  Mechanisms only ever see it through :meth:`Valuation.query`, which
memoizes answers and counts the distinct bundles asked about.
"""
from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

KINDS = ("step-list", "additive", "capped-additive", "single-minded", "zero")


class ValuationError(ValueError):
    pass


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused: every value in the core path has to be exact.
    """
    if isinstance(x, bool):
        raise ValuationError(f"not a rational: {x!r}")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValuationError(f"not a rational: {x!r}") from exc
    raise ValuationError(f"not an exact rational: {x!r}")


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class Valuation:
    """Normalized, non-decreasing valuation behind a counting value oracle.

    Parameters
    ----------
    m : int
        Number of items.
    kind : str
        Builder name, one of :data:`KINDS` (or ``"custom"``).
    params : dict
        Builder parameters, kept for serialization.
    steps : list of (int, Fraction), optional
        Canonical step list: ``v(s)`` is the value of the largest threshold
        ``<= s``, and 0 below the first threshold.
    fn : callable, optional
        Closed-form evaluator used instead of ``steps`` (additive kinds).
    """

    def __init__(self, m: int, kind: str, params: dict, steps=None, fn=None):
        self.m = m
        self.kind = kind
        self.params = params
        self._fn = fn
        self._thresholds = [s for s, _ in steps] if steps is not None else None
        self._values = [v for _, v in steps] if steps is not None else None
        self._memo: dict[int, Fraction] = {}
        self._lock = threading.Lock()

    def value(self, s: int) -> Fraction:
        """Evaluate without touching the query counter."""
        if not 0 <= s <= self.m:
            raise ValuationError(f"bundle {s} outside 0..{self.m}")
        if self._fn is not None:
            return self._fn(s)
        k = bisect.bisect_right(self._thresholds, s)
        return self._values[k - 1] if k else Fraction(0)

    def query(self, s: int) -> Fraction:
        v = self._memo.get(s)
        if v is None:
            v = self.value(s)
            with self._lock:
                self._memo.setdefault(s, v)
        return v

    __call__ = query

    @property
    def queries(self) -> int:
        """Distinct bundles queried since construction or the last reset."""
        return len(self._memo)

    def reset_queries(self) -> None:
        with self._lock:
            self._memo.clear()

    def steps(self) -> list[tuple[int, Fraction]]:
        """Canonical step list (one entry per increase of the function)."""
        if self._thresholds is None:
            out, prev = [], Fraction(0)
            for s in range(1, self.m + 1):
                v = self.value(s)
                if v > prev:
                    out.append((s, v))
                    prev = v
            return out
        return list(zip(self._thresholds, self._values))

    def jump_points(self):
        """Bundles where the value may change, or None if unknown/dense."""
        return self._thresholds

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for key, val in self.params.items():
            if key == "steps":
                out[key] = [[s, fraction_str(v)] for s, v in val]
            elif isinstance(val, Fraction):
                out[key] = fraction_str(val)
            else:
                out[key] = val
        return out

    def scaled(self, factor) -> "Valuation":
        factor = as_fraction(factor)
        if factor < 0:
            raise ValuationError("negative scale factor")
        if factor == 0:
            return zero(self.m)
        return step_list(self.m, [(s, v * factor) for s, v in self.steps()])

    def __repr__(self):
        return f"Valuation(m={self.m}, kind={self.kind!r}, params={self.params!r})"


def _check_m(m):
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValuationError(f"item count must be a positive integer, got {m!r}")


def step_list(m: int, steps) -> Valuation:
    """Step valuation from ``(threshold, value)`` pairs.

    Thresholds must be strictly increasing in ``1..m`` and values positive and
    non-decreasing.
    """
    _check_m(m)
    clean = []
    prev_s, prev_v = 0, Fraction(0)
    for s, v in steps:
        v = as_fraction(v)
        if not isinstance(s, int) or not 1 <= s <= m:
            raise ValuationError(f"threshold {s!r} outside 1..{m}")
        if s <= prev_s:
            raise ValuationError("thresholds must be strictly increasing")
        if v < 0:
            raise ValuationError(f"negative value {v} at threshold {s}")
        if v == 0:
            raise ValuationError(f"step values must be positive (threshold {s})")
        if v < prev_v:
            raise ValuationError(f"decreasing step value at threshold {s}")
        clean.append((s, v))
        prev_s, prev_v = s, v
    # drop flat steps: they do not change the function
    canon = [(s, v) for i, (s, v) in enumerate(clean) if i == 0 or v > clean[i - 1][1]]
    return Valuation(m, "step-list", {"steps": canon}, canon)


def additive(m: int, per_unit) -> Valuation:
    _check_m(m)
    c = as_fraction(per_unit)
    if c < 0:
        raise ValuationError(f"negative per-unit value {c}")
    return Valuation(m, "additive", {"per_unit": c}, fn=lambda s: c * s)


def capped_additive(m: int, per_unit, cap) -> Valuation:
    _check_m(m)
    c, cap = as_fraction(per_unit), as_fraction(cap)
    if c < 0 or cap < 0:
        raise ValuationError("negative per-unit value or cap")
    return Valuation(m, "capped-additive", {"per_unit": c, "cap": cap},
                     fn=lambda s: min(c * s, cap))


def single_minded(m: int, size: int, value) -> Valuation:
    _check_m(m)
    k = as_fraction(value)
    if not isinstance(size, int) or not 1 <= size <= m:
        raise ValuationError(f"desired bundle {size!r} outside 1..{m}")
    if k <= 0:
        raise ValuationError(f"single-minded value must be positive, got {k}")
    return Valuation(m, "single-minded", {"size": size, "value": k}, [(size, k)])


def zero(m: int) -> Valuation:
    _check_m(m)
    return Valuation(m, "zero", {}, [])


def build_valuation(spec: dict, m: int) -> Valuation:
    """Build a valuation from a ``{"kind": ..., <parameters>}`` descriptor."""
    kind = spec.get("kind")
    try:
        if kind == "step-list":
            return step_list(m, [(s, v) for s, v in spec["steps"]])
        if kind == "additive":
            return additive(m, spec["per_unit"])
        if kind == "capped-additive":
            return capped_additive(m, spec["per_unit"], spec["cap"])
        if kind == "single-minded":
            return single_minded(m, spec["size"], spec["value"])
        if kind == "zero":
            return zero(m)
    except KeyError as exc:
        raise ValuationError(f"{kind}: missing parameter {exc.args[0]!r}") from exc
    raise ValuationError(f"unknown valuation kind {kind!r}")


@dataclass(frozen=True)
class Instance:
    m: int
    bidders: tuple
    strictly_increasing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bidders", tuple(self.bidders))
        for i, v in enumerate(self.bidders):
            if v.m != self.m:
                raise ValuationError(f"bidder {i} has m={v.m}, instance has m={self.m}")

    @property
    def n(self) -> int:
        return len(self.bidders)

    def replace(self, i: int, v: Valuation) -> "Instance":
        bidders = list(self.bidders)
        bidders[i] = v
        return Instance(self.m, bidders, self.strictly_increasing)

    def without(self, i: int) -> "Instance":
        """Same instance with bidder ``i`` reporting the zero valuation."""
        return Instance(self.m, [zero(self.m) if j == i else v
                                 for j, v in enumerate(self.bidders)], False)


@dataclass
class ValidationReport:
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok


EXHAUSTIVE_CHECK_LIMIT = 2 ** 12


def _check_points(v: Valuation):
    if v.m <= EXHAUSTIVE_CHECK_LIMIT:
        return range(v.m + 1)
    pts = {0, v.m}
    for s in v.jump_points() or ():
        pts.update((s - 1, s, min(s + 1, v.m)))
    step = max(1, v.m // 512)
    pts.update(range(0, v.m + 1, step))
    return sorted(pts)


def validate(inst: Instance, require_strict: bool = False) -> ValidationReport:
    """Check normalization, monotonicity and (optionally) strictness.

    Every violation is reported as ``(bidder, bundle, message)``.  Checks are
    exhaustive for ``m <= 4096`` and sampled around step thresholds above that.
    """
    report = ValidationReport()
    for i, v in enumerate(inst.bidders):
        if v.m != inst.m:
            report.problems.append((i, None, f"item count {v.m} != {inst.m}"))
            continue
        if v.value(0) != 0:
            report.problems.append((i, 0, "not normalized: v(0) != 0"))
        pts = list(_check_points(v))
        for s, s2 in zip(pts, pts[1:]):
            a, b = v.value(s), v.value(s2)
            if a < 0:
                report.problems.append((i, s, "negative value"))
            if b < a:
                report.problems.append((i, s2, "decreasing value"))
            elif require_strict and s2 == s + 1 and b == a:
                report.problems.append((i, s2, "not strictly increasing"))
        if require_strict and v.m > EXHAUSTIVE_CHECK_LIMIT:
            # a step list is strictly increasing iff every bundle is a threshold
            jumps = v.jump_points()
            if jumps is not None and jumps != list(range(1, v.m + 1)):
                report.problems.append((i, None, "not strictly increasing"))
    return report


class QueryCounter:
    """Per-bidder view of the distinct-bundle query counts of an instance."""

    def __init__(self, inst_or_bidders):
        bidders = getattr(inst_or_bidders, "bidders", inst_or_bidders)
        self.bidders = tuple(bidders)

    def count(self, bidder: int) -> int:
        if not 0 <= bidder < len(self.bidders):
            raise IndexError(f"unknown bidder {bidder}")
        return self.bidders[bidder].queries

    def total(self) -> int:
        return sum(v.queries for v in self.bidders)

    def reset(self) -> None:
        for v in self.bidders:
            v.reset_queries()


def query_count(counter: QueryCounter, bidder: int) -> int:
    return counter.count(bidder)
