"""Distinct value queries grow roughly like log m.

Fits queries = a + b*log2(m) for a few bidder counts and prints the
doubling ratios.  Pass --full to go up to m = 2^20 (tens of seconds).

Run: python3 demos/03_scaling.py [--full]
"""
import sys
from fractions import Fraction

import numpy as np

from midr.bench import doubling_ratios, sweep

top = 20 if "--full" in sys.argv else 16
ms = [2 ** k for k in range(10, top + 1)]
rows = sweep(ms=ms, ns=(2, 8, 32), epsilon=Fraction(1, 4), seed=0)

for n in sorted({r.n for r in rows}):
    sub = [r for r in rows if r.n == n]
    x = np.log2([r.m for r in sub])
    y = np.array([r.queries for r in sub], dtype=float)
    slope, icpt = np.polyfit(x, y, 1)
    print(f"n={n:3d}: queries ~ {icpt:9.1f} + {slope:7.1f}*log2(m); "
          f"slowest run {max(r.seconds for r in sub):.2f}s")
for n, ratios in doubling_ratios(rows).items():
    print(f"n={n:3d} doubling ratios:", {m: round(q, 3) for m, q in ratios.items()})
