"""Walk through one auction: range distribution, Clarke payments, one draw.

Run: python3 demos/01_walkthrough.py
"""
from fractions import Fraction

from midr import Instance, run_midr
from midr.mechanism import expected_utility
from midr.oracle import unweighted_opt
from midr.valuations import additive, capped_additive, single_minded

m = 16
inst = Instance(m, [
    single_minded(m, 9, 20),     # wants 9 units, pays up to 20 for them
    additive(m, Fraction(3, 2)),  # 3/2 per unit
    capped_additive(m, 2, 6),     # 2 per unit, at most 6 units useful
])
eps = Fraction(1, 4)
out = run_midr(inst, eps, seed=11)

print(f"m = {m}, n = {inst.n}, epsilon = {eps}")
print("base allocation:", out.base)
for node in out.distribution.nodes:
    print(f"  coin over bidders {node.lo}..{node.hi}: keep with probability "
          f"{float(node.weight):.6f}")
opt = unweighted_opt(inst)
# everything is an exact Fraction; floats are for display only
print(f"expected welfare {float(out.expected_welfare):.6f}")
print(f"best deterministic welfare {opt}; ratio {float(out.expected_welfare / opt):.4f}")
for i, v in enumerate(inst.bidders):
    print(f"bidder {i}: Pr[served] = {float(out.inclusion_probability(i)):.6f}, "
          f"payment = {float(out.payments[i]):.6f}, "
          f"utility = {float(expected_utility(i, v, out)):.6f}")
print("one draw (seed 11):", out.sampled)
