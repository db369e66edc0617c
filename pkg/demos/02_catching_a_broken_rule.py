"""The exact audit on a correct rule and on a deliberately broken one.

The broken rule gives the single-winner bonus to the wrong allocations.
Over a fixed range it is still an exact optimizer, so random instances
rarely expose it; the instance below is built so that a tiny bidder gains
by overstating its value.

Run: python3 demos/02_catching_a_broken_rule.py
"""
from fractions import Fraction

from midr import Instance
from midr.oracle import truthfulness_audit
from midr.valuations import single_minded

inst = Instance(8, [single_minded(8, 4, 1), single_minded(8, 4, Fraction(1, 400))])
eps = Fraction(1, 2)

for label, broken in (("correct rule", False), ("inverted bonus", True)):
    rep = truthfulness_audit(inst, eps, "standard-general", 20, seed=0, invert_bonus=broken)
    print(f"{label}: {rep.checks} checks, {len(rep.violations)} violations")
    for e in rep.violations[:3]:
        gain = e.deviant_utility - e.truthful_utility
        print(f"  bidder {e.bidder} reporting '{e.misreport}' gains {gain}")
