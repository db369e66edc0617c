"""Two-bidder instances on which naive all-or-nothing ranges fail.

In I_k the welfare C is only reachable by splitting k / m-k; every split
that gives all units to one bidder earns about C/2.  The restricted
mechanism (m a power of two, strictly increasing valuations) stays within
(1 - epsilon) of C for every k.

Run: python3 demos/04_hard_two_bidder_family.py
"""
from fractions import Fraction

from midr.lowerbound import gen_lb_instance
from midr.mechanism import Mechanism

eps, sigma = Fraction(1, 10), Fraction(1, 100)
for m in (8, 64, 1024):
    mech = Mechanism(m, 2, eps, "restricted")
    worst = None
    for k in range(1, m):
        # small eta keeps the valuations strictly increasing
        lb = gen_lb_instance(m, k, sigma, 1, Fraction(1, 10 * m * m))
        dist, welfare = mech.solve(lb.instance)
        if worst is None or welfare < worst[0]:
            worst = (welfare, k, dist.base)
    w, k, base = worst
    print(f"m={m:5d}: worst k={k:4d}, allocation {base}, welfare {float(w):.4f} (C = 1)")
