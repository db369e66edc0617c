"""Query-count and wall-time sweeps on synthetic concave step valuations."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .mechanism import Mechanism
from .valuations import Instance, QueryCounter, step_list

DEFAULT_MS = tuple(2 ** e for e in range(10, 21, 2))
DEFAULT_NS = (2, 8, 64)


def concave_steps(m: int, rng: random.Random, steps: int = 8) -> list:
    """Random step list with shrinking increments (a concave-looking shape)."""
    k = min(steps, m)
    pts = sorted(rng.sample(range(1, m + 1), k))
    incs = sorted((rng.randint(1, 1000) for _ in pts), reverse=True)
    total, out = 0, []
    for s, inc in zip(pts, incs):
        total += inc
        out.append((s, Fraction(total)))
    return out


def synthetic_instance(m: int, n: int, seed: int = 0, steps: int = 8) -> Instance:
    rng = random.Random(f"{seed}:{n}")
    # thresholds are drawn on a unit scale and stretched with m, so instances
    # for different m share their shape
    shapes = [concave_steps(2 ** 10, rng, steps) for _ in range(n)]
    bidders = []
    for shape in shapes:
        scaled = {}
        for s, v in shape:
            scaled[max(1, s * m // 2 ** 10)] = v
        bidders.append(step_list(m, sorted(scaled.items())))
    return Instance(m, bidders)


@dataclass
class BenchRow:
    m: int
    n: int
    epsilon: Fraction
    queries: int
    seconds: float
    expected_welfare: Fraction

    def as_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "epsilon": self.epsilon, "queries": self.queries,
                "seconds": round(self.seconds, 3), "expected_welfare": self.expected_welfare}


def bench_one(m: int, n: int, epsilon, seed: int = 0) -> BenchRow:
    """Solve one synthetic instance (allocation only, no payments)."""
    inst = synthetic_instance(m, n, seed)
    mech = Mechanism(m, n, epsilon, "standard-general")
    start = time.perf_counter()
    _, welfare = mech.solve(inst)
    elapsed = time.perf_counter() - start
    return BenchRow(m, n, Fraction(epsilon), QueryCounter(inst).total(), elapsed, welfare)


def sweep(ms=DEFAULT_MS, ns=DEFAULT_NS, epsilon=Fraction(1, 4), seed: int = 0,
          progress=None) -> list:
    rows = []
    for n in ns:
        for m in ms:
            row = bench_one(m, n, epsilon, seed)
            rows.append(row)
            if progress:
                progress(row)
    return rows


def doubling_ratios(rows) -> dict:
    """For each n, query-count ratios between consecutive doublings of m."""
    by_n = {}
    for r in rows:
        by_n.setdefault(r.n, {})[r.m] = r.queries
    out = {}
    for n, qs in by_n.items():
        out[n] = {m: qs[2 * m] / qs[m] for m in sorted(qs) if 2 * m in qs and qs[m]}
    return out
